"""
Vectorized Liouvillian and matrix-exponential reference propagation.

Column-stacking convention: vec(A X B) = (B^T ⊗ A) vec(X).
"""

from typing import Sequence

import numpy as np
from scipy.linalg import expm

from config import ORACLE_MAX_DIM
from dynamics.noise import CollapseTerm
from operators.hilbert import DensityMatrix, LayoutError, Operator


class OracleDimensionError(ValueError):
    """Raised when the oracle is asked for a space above its dimension guard."""
    pass


def vec(matrix: np.ndarray) -> np.ndarray:
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(vector: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vector).reshape((dim, dim), order="F")


def lmul(left: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> L rho."""
    return np.kron(np.eye(left.shape[0]), left)


def rmul(right: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho R."""
    return np.kron(right.T, np.eye(right.shape[0]))


def lrmul(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> L rho R."""
    return np.kron(right.T, left)


def liouvillian(h: Operator, terms: Sequence[CollapseTerm]) -> np.ndarray:
    """Dense n^2 x n^2 generator of the master equation."""
    superop = -1j * (lmul(h.data) - rmul(h.data))
    for term in terms:
        if term.operator.space != h.space:
            raise LayoutError(f"Collapse term {term.label!r} layout differs from the Hamiltonian")
        c = term.collapse
        c_dag = c.conj().T
        jump = c_dag @ c
        superop = superop + lrmul(c, c_dag) - 0.5 * (lmul(jump) + rmul(jump))
    return superop


def expm_oracle(
    h: Operator,
    terms: Sequence[CollapseTerm],
    rho0: DensityMatrix,
    t: float,
) -> DensityMatrix:
    """
    rho(t) = unvec(exp(L t) vec(rho0)).

    Raises:
        OracleDimensionError: If the Hilbert-space dimension exceeds the guard
        LayoutError: On layout mismatch
    """
    if h.dim > ORACLE_MAX_DIM:
        raise OracleDimensionError(
            f"Oracle limited to dimension {ORACLE_MAX_DIM}, got {h.dim}"
        )
    if rho0.space != h.space:
        raise LayoutError(f"Initial state layout {rho0.space.labels} differs from {h.space.labels}")
    if t == 0:
        return DensityMatrix(rho0.space, rho0.data)

    propagator = expm(liouvillian(h, terms) * t)
    return DensityMatrix(h.space, unvec(propagator @ vec(rho0.data), h.dim))

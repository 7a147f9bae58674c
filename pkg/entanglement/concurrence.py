"""
Two-atom reduction and Wootters concurrence.

Two-qubit basis order is fixed to (|ee>, |el>, |le>, |ll>).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd

from config import CONCURRENCE_CEILING, STATE_HERMITICITY_TOL
from operators.hilbert import ATOM_A, ATOM_B, DensityMatrix, HilbertSpace, LayoutError, partial_trace
from operators.validators import ValidationError, validate_density_matrix, validate_hermitian

SIGMA_Y = np.array([[0.0, -1j], [1j, 0.0]])
SIGMA_YY = np.kron(SIGMA_Y, SIGMA_Y)

METHODS = ("hermitian", "direct")


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """4x4 density matrix of the atom pair."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (4, 4):
            raise LayoutError(f"Two-qubit state must be 4x4, got {matrix.shape}")
        matrix.flags.writeable = False
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_ket(cls, psi: np.ndarray) -> "TwoQubitState":
        psi = np.asarray(psi, dtype=complex).ravel()
        return cls(np.outer(psi, psi.conj()))

    def validate(self, **tolerances) -> bool:
        return validate_density_matrix(self.matrix, name="two-qubit state", **tolerances)

    def spin_flip(self) -> np.ndarray:
        """rho~ = (s_y ⊗ s_y) rho* (s_y ⊗ s_y)."""
        return SIGMA_YY @ self.matrix.conj() @ SIGMA_YY


@dataclass
class ConcurrenceTrace:
    """
    Concurrence sampled in time.

    ``meta`` carries provenance such as the scenario hash, seed and realization count.
    """

    times: np.ndarray
    scaled_times: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.scaled_times = np.asarray(self.scaled_times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if not (len(self.times) == len(self.scaled_times) == len(self.values)):
            raise ValidationError(
                f"Trace arrays differ in length: {len(self.times)}, "
                f"{len(self.scaled_times)}, {len(self.values)}"
            )
        if self.values.size and (self.values.min() < 0 or self.values.max() > CONCURRENCE_CEILING):
            raise ValidationError(
                f"Concurrence outside [0, 1]: min {self.values.min():.3e}, max {self.values.max():.12g}"
            )

    def __len__(self) -> int:
        return len(self.values)

    def at(self, scaled_time: float) -> float:
        """Linearly interpolated value at a scaled time."""
        return float(np.interp(scaled_time, self.scaled_times, self.values))

    def window(self, start: float, end: float) -> np.ndarray:
        """Values whose scaled time lies in [start, end]."""
        mask = (self.scaled_times >= start) & (self.scaled_times <= end)
        return self.values[mask]

    def to_frame(self, stderr: Optional[np.ndarray] = None) -> pd.DataFrame:
        frame = pd.DataFrame({
            "t": self.times,
            "scaled_time": self.scaled_times,
            "concurrence": self.values,
        })
        if stderr is not None:
            frame["stderr"] = np.asarray(stderr, dtype=float)
        return frame


def reduce_to_atoms(rho: DensityMatrix, space: HilbertSpace) -> TwoQubitState:
    """
    Trace out both cavities.

    Raises:
        LayoutError: For a non-canonical space or mismatched state
    """
    space.require_canonical()
    if rho.space != space:
        raise LayoutError(f"State layout {rho.space.labels} differs from {space.labels}")
    keep = [space.index(ATOM_A), space.index(ATOM_B)]
    return TwoQubitState(partial_trace(rho.data, space.dims, keep))


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    eigenvalues, vectors = np.linalg.eigh(matrix)
    root = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return (vectors * root) @ vectors.conj().T


def _wootters_roots(state: TwoQubitState, method: str) -> np.ndarray:
    """Square roots of the eigenvalues of rho rho~, sorted descending."""
    rho = state.matrix
    flipped = state.spin_flip()

    if method == "hermitian":
        root = _psd_sqrt(rho)
        eigenvalues = np.linalg.eigvalsh(root @ flipped @ root)
    elif method == "direct":
        eigenvalues = np.real(np.linalg.eigvals(rho @ flipped))
    else:
        raise ValueError(f"Unknown concurrence method {method!r}; expected one of {METHODS}")

    return np.sort(np.sqrt(np.clip(eigenvalues, 0.0, None)))[::-1]


def concurrence(rho, method: str = "hermitian") -> float:
    """
    Wootters concurrence C = max(0, l1 - l2 - l3 - l4).

    Args:
        rho: TwoQubitState or 4x4 array
        method: "hermitian" (eigenvalues of sqrt(rho) rho~ sqrt(rho)) or
            "direct" (eigenvalues of rho rho~)

    Returns:
        Concurrence in [0, 1]

    Raises:
        ValidationError: If the input is not Hermitian within tolerance
    """
    state = rho if isinstance(rho, TwoQubitState) else TwoQubitState(rho)
    validate_hermitian(state.matrix, tol=STATE_HERMITICITY_TOL, relative=False, name="two-qubit state")
    state = TwoQubitState(0.5 * (state.matrix + state.matrix.conj().T))

    roots = _wootters_roots(state, method)
    value = roots[0] - roots[1:].sum()
    return float(min(max(value, 0.0), 1.0))


def pure_state_concurrence(psi: np.ndarray) -> float:
    """2 |ad - bc| for a|ee> + b|el> + c|le> + d|ll>."""
    a, b, c, d = np.asarray(psi, dtype=complex).ravel()
    return float(2.0 * abs(a * d - b * c))


def concurrence_series(states: np.ndarray, method: str = "hermitian") -> np.ndarray:
    """Concurrence of a stack of 4x4 states, shape (T, 4, 4)."""
    return np.array([concurrence(matrix, method) for matrix in states])

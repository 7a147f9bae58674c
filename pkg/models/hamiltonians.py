"""
Hamiltonians of the double Jaynes-Cummings family under the rotating-wave approximation.

Each atom-cavity pair j in {A, B} contributes
    lab frame:       1/2 omega0 s3_j + omega n_j + G_j (s+_j a_j^N + s-_j a_j^N^dag)
    rotating frame:  1/2 (omega0 - N omega) s3_j + G_j (s+_j a_j^N + H.c.)
    pump frame:      Delta_P n_j + 1/2 (omega0 - N omega_P) s3_j
                     + [eps e^{-i chi} a_j^M + G_j a_j^N s+_j + H.c.]
The two pairs never interact, so every full-space Hamiltonian is H_A + H_B.
"""

import logging
from dataclasses import replace
from typing import Optional

import numpy as np

from config import HERMITICITY_TOL
from models.params import DriveParams, ModelParams, resolve_drive
from operators.hilbert import (
    ATOM_A,
    ATOM_B,
    CAV_A,
    CAV_B,
    HilbertSpace,
    Operator,
    embed,
    fock_destroy,
    qubit_ops,
)
from operators.validators import validate_hermitian

logger = logging.getLogger(__name__)

PAIRS = (("a", ATOM_A, CAV_A), ("b", ATOM_B, CAV_B))


class TruncationError(RuntimeError):
    """Raised when a Fock cutoff cannot represent the dynamics."""

    def __init__(self, message: str, max_tail: float = float("nan"), suggested_cutoff: int = 0):
        super().__init__(message)
        self.max_tail = max_tail
        self.suggested_cutoff = suggested_cutoff


def _present_pairs(space: HilbertSpace):
    """Pairs (side, atom, cavity) whose atom and cavity both live in ``space``."""
    return [pair for pair in PAIRS if pair[1] in space.labels and pair[2] in space.labels]


def _check_cutoff(space: HilbertSpace, cavity: str, order: int):
    cutoff = space.dim_of(cavity)
    if cutoff < order + 1:
        raise TruncationError(
            f"Cavity {cavity} cutoff {cutoff} cannot hold a^{order} transitions; "
            f"need at least {order + 1}",
            suggested_cutoff=order + 1,
        )


def _checked(op: Operator, name: str) -> Operator:
    validate_hermitian(op.data, tol=HERMITICITY_TOL, relative=True, name=name)
    return op


def _interaction(space: HilbertSpace, atom: str, cavity: str, g: float, n: int) -> Operator:
    sigma_plus, sigma_minus, _ = qubit_ops()
    a_n = embed(fock_destroy(space.dim_of(cavity)).power(n), cavity, space)
    return g * (embed(sigma_plus, atom, space) @ a_n + embed(sigma_minus, atom, space) @ a_n.dag())


def _number(space: HilbertSpace, cavity: str) -> Operator:
    a = embed(fock_destroy(space.dim_of(cavity)), cavity, space)
    return a.dag() @ a


def _inversion(space: HilbertSpace, atom: str) -> Operator:
    return embed(qubit_ops()[2], atom, space)


def _pair_hamiltonian(
    space: HilbertSpace,
    side: str,
    p: ModelParams,
    n: int,
    drive: Optional[DriveParams] = None,
) -> Operator:
    atom, cavity = {s: (at, cav) for s, at, cav in PAIRS}[side]
    _check_cutoff(space, cavity, n)
    g = p.coupling(side)
    h = _interaction(space, atom, cavity, g, n)

    if drive is not None:
        _check_cutoff(space, cavity, drive.m_order)
        # omega0 - N omega_P = (omega0 - N omega) + N Delta_P
        atom_detuning = p.omega0 - n * p.omega + n * drive.delta_p
        h = h + drive.delta_p * _number(space, cavity) + 0.5 * atom_detuning * _inversion(space, atom)
        a_m = embed(fock_destroy(space.dim_of(cavity)).power(drive.m_order), cavity, space)
        pump = drive.epsilon * np.exp(-1j * drive.chi) * a_m
        h = h + pump + pump.dag()
    elif p.frame == "rotating":
        h = h + 0.5 * (p.omega0 - n * p.omega) * _inversion(space, atom)
    else:
        h = h + 0.5 * p.omega0 * _inversion(space, atom) + p.omega * _number(space, cavity)

    return h


def _sum_pairs(space: HilbertSpace, p: ModelParams, n: int, drive: Optional[DriveParams]) -> Operator:
    total = Operator(space, np.zeros((space.total_dim, space.total_dim)))
    for side, _, _ in _present_pairs(space):
        total = total + _pair_hamiltonian(space, side, p, n, drive)
    return total


def build_double_jc(p: ModelParams, space: HilbertSpace) -> Operator:
    """
    Linear double JC Hamiltonian (one-photon exchange in both cavities).

    The B-cavity exchange term uses s-_B as the conjugate partner of s+_B.

    Raises:
        LayoutError: For a non-canonical space
    """
    space.require_canonical()
    return _checked(_sum_pairs(space, p, 1, None), "double JC Hamiltonian")


def build_multiphoton_double_jc(p: ModelParams, space: HilbertSpace) -> Operator:
    """
    N-photon double JC Hamiltonian with G_j (s+_j a_j^N + H.c.) exchange terms.

    Raises:
        LayoutError: For a non-canonical space
        TruncationError: If a cutoff is below N + 1
    """
    space.require_canonical()
    if not p.is_multiphoton_resonant:
        logger.debug(f"Off-resonant multiphoton model: omega0 - N omega = {p.detuning:.6g}")
    return _checked(_sum_pairs(space, p, p.n_photon, None), "multiphoton double JC Hamiltonian")


def build_driven_double_jc(p: ModelParams, d: DriveParams, space: HilbertSpace) -> Operator:
    """
    Nonlinearly pumped multiphoton double JC Hamiltonian in the pump rotating frame.

    One shared pump acts on both cavities; the resonance rule is applied when the
    drive is flagged resonant.
    """
    space.require_canonical()
    d = resolve_drive(p, d)
    return _checked(_sum_pairs(space, p, p.n_photon, d), "driven double JC Hamiltonian")


def build_interaction(p: ModelParams, space: HilbertSpace) -> Operator:
    """Exchange terms only: sum_j G_j (s+_j a_j^N + H.c.)."""
    total = Operator(space, np.zeros((space.total_dim, space.total_dim)))
    for side, atom, cavity in _present_pairs(space):
        _check_cutoff(space, cavity, p.n_photon)
        total = total + _interaction(space, atom, cavity, p.coupling(side), p.n_photon)
    return total


def build_single_jc(
    p: ModelParams,
    cutoff: int,
    drive: Optional[DriveParams] = None,
    side: str = "a",
) -> Operator:
    """
    Hamiltonian of one atom-cavity pair on its own (atom, cavity) space.

    Used as the generator of the pair-factorized propagation and as the single
    JC building block in tests. ``side`` selects which coupling (G_A or G_B) applies.
    """
    space = HilbertSpace.pair(side, cutoff)
    if drive is not None:
        drive = resolve_drive(p, drive)
    return _checked(_pair_hamiltonian(space, side, p, p.n_photon, drive), "single JC Hamiltonian")


def build_hamiltonian(
    p: ModelParams,
    space: HilbertSpace,
    drive: Optional[DriveParams] = None,
) -> Operator:
    """Dispatch to the linear, multiphoton or driven builder."""
    if drive is not None:
        return build_driven_double_jc(p, drive, space)
    if p.n_photon == 1:
        return build_double_jc(p, space)
    return build_multiphoton_double_jc(p, space)


def excitation_operator(space: HilbertSpace, n_photon: int = 1) -> Operator:
    """Conserved excitation number N s+s- (each atom) + a^dag a (each cavity)."""
    sigma_plus, sigma_minus, _ = qubit_ops()
    total = Operator(space, np.zeros((space.total_dim, space.total_dim)))
    for _, atom, cavity in _present_pairs(space):
        total = total + n_photon * embed(sigma_plus @ sigma_minus, atom, space) + _number(space, cavity)
    return total


def apply_disorder(p: ModelParams, delta_a: float, delta_b: float) -> ModelParams:
    """Return a copy with G_A <- G_A (1 + delta_A) and G_B <- G_B (1 + delta_B)."""
    return replace(p, g_a=p.g_a * (1.0 + delta_a), g_b=p.g_b * (1.0 + delta_b))

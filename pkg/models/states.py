"""
Initial states: an entangled two-atom superposition with both cavities in vacuum.
"""

import numpy as np

from models.params import InitialStateSpec, StateCase
from operators.hilbert import EXCITED, GROUND, DensityMatrix, HilbertSpace

# Two-atom basis order (|ee>, |el>, |le>, |ll>)
EE, EL, LE, LL = 0, 1, 2, 3


def atomic_amplitudes(spec: InitialStateSpec) -> np.ndarray:
    """
    Two-atom state vector in the (|ee>, |el>, |le>, |ll>) basis.

    NO_SUDDEN_DEATH:  sin(alpha) |l_A e_B> + cos(alpha) |e_A l_B>
    SUDDEN_DEATH:     sin(alpha) |l_A l_B> + cos(alpha) |e_A e_B>
    """
    psi = np.zeros(4, dtype=complex)
    s, c = np.sin(spec.alpha), np.cos(spec.alpha)
    if spec.case is StateCase.NO_SUDDEN_DEATH:
        psi[LE], psi[EL] = s, c
    else:
        psi[LL], psi[EE] = s, c
    return psi / np.linalg.norm(psi)


def atomic_density(spec: InitialStateSpec) -> np.ndarray:
    """4x4 density matrix of the initial two-atom state."""
    psi = atomic_amplitudes(spec)
    return np.outer(psi, psi.conj())


def max_excitation(spec: InitialStateSpec) -> int:
    """Largest number of excited atoms among the components of the initial state."""
    amplitudes = atomic_amplitudes(spec)
    excited_counts = {EE: 2, EL: 1, LE: 1, LL: 0}
    return max(count for index, count in excited_counts.items() if abs(amplitudes[index]) > 0)


def initial_state(spec: InitialStateSpec, space: HilbertSpace) -> DensityMatrix:
    """
    Pure product of the two-atom superposition with the cavity vacuum |0_A 0_B>.

    Raises:
        LayoutError: For a non-canonical space
    """
    space.require_canonical()
    amplitudes = atomic_amplitudes(spec)
    levels = {EE: (EXCITED, EXCITED), EL: (EXCITED, GROUND), LE: (GROUND, EXCITED), LL: (GROUND, GROUND)}

    ket = np.zeros(space.total_dim, dtype=complex)
    for index, (atom_a, atom_b) in levels.items():
        if amplitudes[index] != 0:
            ket[space.basis_index(atom_a, 0, atom_b, 0)] += amplitudes[index]

    return DensityMatrix.from_ket(ket, space)

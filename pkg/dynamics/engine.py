"""
Lindblad master-equation integration on the full composite space.

    d rho / dt = -i [H, rho] + sum_n ( C_n rho C_n^dag - 1/2 {C_n^dag C_n, rho} )
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from config import (
    ATOL,
    CUTOFF_ESCALATION,
    EVOLVE_EIGENVALUE_TOL,
    EVOLVE_TRACE_TOL,
    INTEGRATOR_METHOD,
    MAX_CUTOFF,
    RTOL,
    TAIL_LEVELS,
    TAIL_TOLERANCE,
)
from dynamics.noise import CollapseTerm
from models.hamiltonians import TruncationError
from operators.hilbert import DensityMatrix, HilbertSpace, LayoutError, Operator, partial_trace
from operators.validators import ValidationError, state_diagnostics

logger = logging.getLogger(__name__)


class StiffnessError(RuntimeError):
    """Raised when the adaptive integrator fails (step-size underflow or divergence)."""
    pass


@dataclass(frozen=True)
class TimeGrid:
    """
    Output sampling of a run.

    ``t_end`` is in scaled time G t / 2π where G is the reference coupling ``g_ref``.
    """

    t_end: float
    n_samples: int
    rtol: float = RTOL
    atol: float = ATOL
    g_ref: float = 1.0

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValidationError(f"t_end must be > 0, got {self.t_end}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ValidationError(f"n_samples must be an integer >= 2, got {self.n_samples}")
        if not (self.rtol > 0 and self.atol > 0):
            raise ValidationError(f"rtol and atol must be > 0, got {self.rtol}, {self.atol}")
        if not self.g_ref > 0:
            raise ValidationError(f"g_ref must be > 0, got {self.g_ref}")

    def scaled_times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, int(self.n_samples))

    def times(self) -> np.ndarray:
        """Raw instants t = 2π x / G."""
        return 2.0 * math.pi * self.scaled_times() / self.g_ref

    @property
    def t_max(self) -> float:
        return 2.0 * math.pi * self.t_end / self.g_ref


@dataclass
class TrajectoryDiagnostics:
    """Worst values seen over all output samples."""

    max_trace_deviation: float = 0.0
    min_eigenvalue: float = 1.0
    max_tail_population: float = 0.0
    rhs_evaluations: int = 0
    propagator_steps: int = 0
    cutoff: int = 0

    def absorb(self, trace_deviation: float, min_eigenvalue: float, tail: float = 0.0):
        self.max_trace_deviation = max(self.max_trace_deviation, trace_deviation)
        self.min_eigenvalue = min(self.min_eigenvalue, min_eigenvalue)
        self.max_tail_population = max(self.max_tail_population, tail)

    def to_dict(self) -> dict:
        return {
            "max_trace_deviation": self.max_trace_deviation,
            "min_eigenvalue": self.min_eigenvalue,
            "max_tail_population": self.max_tail_population,
            "rhs_evaluations": self.rhs_evaluations,
            "propagator_steps": self.propagator_steps,
            "cutoff": self.cutoff,
        }


@dataclass
class Trajectory:
    """Sampled density matrices of one run."""

    space: HilbertSpace
    times: np.ndarray
    states: List[DensityMatrix]
    diagnostics: TrajectoryDiagnostics = field(default_factory=TrajectoryDiagnostics)

    def __len__(self) -> int:
        return len(self.states)

    def expect(self, op: Operator) -> np.ndarray:
        """Real expectation value tr(op rho) at every sample."""
        if op.space != self.space:
            raise LayoutError(f"Observable layout {op.space.labels} differs from {self.space.labels}")
        return np.array([np.real(np.trace(op.data @ rho.data)) for rho in self.states])

    def purities(self) -> np.ndarray:
        return np.array([rho.purity() for rho in self.states])


class LindbladEngine:
    """
    Dense Lindblad generator with an adaptive Runge-Kutta propagator.

    The generator acts on stacks of matrices of shape (..., n, n), so several
    initial operators can be propagated in one integration.
    """

    def __init__(
        self,
        hamiltonian: np.ndarray,
        collapses: Sequence[np.ndarray] = (),
        rtol: float = RTOL,
        atol: float = ATOL,
        method: str = INTEGRATOR_METHOD,
    ):
        """
        Initialize the engine.

        Args:
            hamiltonian: Dense n x n Hamiltonian
            collapses: Collapse operators C_n (rates already folded in)
            rtol: Relative integrator tolerance
            atol: Absolute integrator tolerance
            method: scipy ``solve_ivp`` method name
        """
        self.hamiltonian = np.asarray(hamiltonian, dtype=complex)
        self.dim = self.hamiltonian.shape[0]
        self.collapses = [np.asarray(c, dtype=complex) for c in collapses]
        for c in self.collapses:
            if c.shape != self.hamiltonian.shape:
                raise LayoutError(f"Collapse operator shape {c.shape} != {self.hamiltonian.shape}")
        self.collapses_dag = [c.conj().T for c in self.collapses]
        self.rtol = rtol
        self.atol = atol
        self.method = method
        self.rhs_evaluations = 0

        jump = np.zeros_like(self.hamiltonian)
        for c, c_dag in zip(self.collapses, self.collapses_dag):
            jump += c_dag @ c
        # H_eff = H - i/2 sum C^dag C
        self._h_eff = self.hamiltonian - 0.5j * jump
        self._h_eff_dag = self._h_eff.conj().T

    @classmethod
    def from_operators(cls, hamiltonian: Operator, terms: Sequence[CollapseTerm], **kwargs) -> "LindbladEngine":
        for term in terms:
            if term.operator.space != hamiltonian.space:
                raise LayoutError(
                    f"Collapse term {term.label!r} lives on {term.operator.space.labels}, "
                    f"Hamiltonian on {hamiltonian.space.labels}"
                )
        return cls(hamiltonian.data, [term.collapse for term in terms], **kwargs)

    def derivative(self, rho: np.ndarray) -> np.ndarray:
        """d rho / dt for a single matrix or a stack of matrices."""
        out = -1j * (self._h_eff @ rho - rho @ self._h_eff_dag)
        for c, c_dag in zip(self.collapses, self.collapses_dag):
            out += c @ rho @ c_dag
        return out

    def propagate(self, initial: np.ndarray, times: np.ndarray) -> np.ndarray:
        """
        Integrate from t = 0 and sample at ``times``.

        Args:
            initial: Matrix (n, n) or stack (k, n, n) at t = 0
            times: Increasing sample instants starting at 0

        Returns:
            Array of shape (len(times),) + initial.shape

        Raises:
            StiffnessError: If the integrator does not reach the final instant
        """
        initial = np.asarray(initial, dtype=complex)
        shape = initial.shape
        if shape[-2:] != (self.dim, self.dim):
            raise LayoutError(f"Initial operator shape {shape} does not match dimension {self.dim}")

        def fun(_t, y):
            self.rhs_evaluations += 1
            return self.derivative(y.reshape(shape)).ravel()

        times = np.asarray(times, dtype=float)
        solution = solve_ivp(
            fun,
            t_span=(0.0, float(times[-1])),
            y0=initial.ravel(),
            method=self.method,
            t_eval=times,
            rtol=self.rtol,
            atol=self.atol,
        )

        if not solution.success:
            raise StiffnessError(
                f"Integrator {self.method} failed at t={solution.t[-1] if solution.t.size else 0.0:.6g}: "
                f"{solution.message}"
            )

        logger.debug(
            f"{self.method}: {solution.nfev} RHS evaluations, {len(times)} samples, dim {self.dim}"
        )
        return solution.y.T.reshape((len(times),) + shape)


def rhs(h: Operator, terms: Sequence[CollapseTerm], rho: DensityMatrix) -> np.ndarray:
    """
    Right-hand side of the master equation at one state.

    Raises:
        LayoutError: If the state, Hamiltonian and collapse terms do not share a layout
    """
    if rho.space != h.space:
        raise LayoutError(f"State layout {rho.space.labels} differs from {h.space.labels}")
    return LindbladEngine.from_operators(h, terms).derivative(rho.data)


def tail_population(matrix: np.ndarray, space: HilbertSpace, levels: int = TAIL_LEVELS) -> float:
    """Largest population held by the ``levels`` highest Fock states of any cavity."""
    worst = 0.0
    for cavity in space.cavity_labels():
        reduced = partial_trace(matrix, space.dims, [space.index(cavity)])
        populations = np.real(np.diag(reduced))
        worst = max(worst, float(populations[-levels:].sum()))
    return worst


def suggested_cutoff(cutoff: int) -> int:
    return min(cutoff * CUTOFF_ESCALATION, MAX_CUTOFF)


def check_sample(
    matrix: np.ndarray,
    t: float,
    trace_tol: float = EVOLVE_TRACE_TOL,
    eigenvalue_tol: float = EVOLVE_EIGENVALUE_TOL,
    name: str = "state",
):
    """
    Trace and positivity check of one (already symmetrized) output sample.

    Returns:
        Tuple (trace_deviation, min_eigenvalue)

    Raises:
        ValidationError: If either bound is violated
    """
    trace_deviation, min_eigenvalue, _ = state_diagnostics(matrix)
    if trace_deviation > trace_tol:
        raise ValidationError(
            f"{name} trace deviates from 1 by {trace_deviation:.3e} at t={t:.6g}; tighten rtol/atol"
        )
    if min_eigenvalue < eigenvalue_tol:
        raise ValidationError(
            f"{name} has eigenvalue {min_eigenvalue:.3e} at t={t:.6g}; tighten rtol/atol"
        )
    return trace_deviation, min_eigenvalue


def raise_for_tail(max_tail: float, cutoff: int, t: Optional[float] = None):
    """
    Raises:
        TruncationError: If the tail population exceeds the tolerance
    """
    if max_tail > TAIL_TOLERANCE:
        where = f" at t={t:.6g}" if t is not None else ""
        raise TruncationError(
            f"Fock cutoff {cutoff} too small: tail population {max_tail:.3e}{where} "
            f"exceeds {TAIL_TOLERANCE:.0e}; try cutoff {suggested_cutoff(cutoff)}",
            max_tail=max_tail,
            suggested_cutoff=suggested_cutoff(cutoff),
        )


def evolve(
    h: Operator,
    terms: Sequence[CollapseTerm],
    rho0: DensityMatrix,
    grid: TimeGrid,
    check_truncation: bool = True,
) -> Trajectory:
    """
    Integrate the master equation and sample the state on ``grid``.

    Every sample is re-symmetrized (rho <- (rho + rho^dag) / 2) and checked for
    trace and positivity.

    Args:
        h: Hamiltonian
        terms: Collapse terms on the same layout
        rho0: Initial state
        grid: Output sampling and tolerances
        check_truncation: Enforce the cavity tail bound

    Returns:
        Trajectory with diagnostics

    Raises:
        LayoutError: On layout mismatch
        ValidationError: Invalid initial state or a conservation check failure
        TruncationError: Tail population above tolerance
        StiffnessError: Integrator failure
    """
    if rho0.space != h.space:
        raise LayoutError(f"Initial state layout {rho0.space.labels} differs from {h.space.labels}")
    rho0.validate()

    engine = LindbladEngine.from_operators(h, terms, rtol=grid.rtol, atol=grid.atol)
    times = grid.times()
    samples = engine.propagate(rho0.data, times)

    cutoffs = [h.space.dim_of(c) for c in h.space.cavity_labels()]
    diagnostics = TrajectoryDiagnostics(
        rhs_evaluations=engine.rhs_evaluations,
        cutoff=max(cutoffs) if cutoffs else 0,
    )

    states = []
    for t, matrix in zip(times, samples):
        matrix = 0.5 * (matrix + matrix.conj().T)
        trace_deviation, min_eigenvalue = check_sample(matrix, t)
        tail = tail_population(matrix, h.space) if cutoffs else 0.0
        diagnostics.absorb(trace_deviation, min_eigenvalue, tail)
        if check_truncation:
            raise_for_tail(tail, diagnostics.cutoff, t)
        states.append(DensityMatrix(h.space, matrix))

    logger.debug(
        f"evolve: dim {h.dim}, {len(terms)} collapse terms, "
        f"max trace dev {diagnostics.max_trace_deviation:.2e}, "
        f"min eig {diagnostics.min_eigenvalue:.2e}"
    )
    return Trajectory(h.space, times, states, diagnostics)

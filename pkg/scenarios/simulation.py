"""
Single-realization simulation of a scenario: cutoff policy, engine dispatch and
concurrence extraction.
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from config import DRIVEN_CUTOFF, MAX_CUTOFF
from dynamics.engine import TrajectoryDiagnostics, evolve
from dynamics.factorized import evolve_factorized
from dynamics.noise import collapse_catalog
from entanglement.concurrence import ConcurrenceTrace, concurrence_series, reduce_to_atoms
from models.hamiltonians import TruncationError, build_hamiltonian
from models.params import DriveParams, ModelParams, resolve_drive
from models.states import initial_state, max_excitation
from operators.hilbert import HilbertSpace
from scenarios.config import ScenarioConfig

logger = logging.getLogger(__name__)


@dataclass
class SimulationResult:
    """Concurrence trace and two-atom states of one realization."""

    trace: ConcurrenceTrace
    atom_states: np.ndarray
    diagnostics: TrajectoryDiagnostics
    cutoff: int


def auto_cutoff(config: ScenarioConfig) -> int:
    """
    Fock cutoff chosen when the config says "auto".

    Undriven zero-temperature runs never exceed (max excitation) N photons per
    cavity, so (max excitation) N + 2 is exact. Driven or thermal runs start at
    the driven default.
    """
    n = config.model.n_photon
    exact = max_excitation(config.initial) * n + 2
    if config.conserves_excitation:
        return exact
    orders = n + 1 if config.drive is None else max(n, config.drive.m_order) + 1
    return max(DRIVEN_CUTOFF, exact, orders)


def nominal_drive(config: ScenarioConfig) -> Optional[DriveParams]:
    """Drive with the resonance rule applied to the nominal couplings."""
    if config.drive is None:
        return None
    return replace(resolve_drive(config.model, config.drive), resonant=False)


def _atom_states(config: ScenarioConfig, model: ModelParams, drive, cutoff: int, check: bool):
    if config.engine == "factorized":
        result = evolve_factorized(
            model, config.noise, config.initial, cutoff, config.grid,
            drive=drive, check_truncation=check,
        )
        return result.atom_states, result.diagnostics

    space = HilbertSpace.double_jc(cutoff)
    h = build_hamiltonian(model, space, drive)
    terms = collapse_catalog(config.noise, space)
    trajectory = evolve(h, terms, initial_state(config.initial, space), config.grid, check_truncation=check)
    states = np.array([reduce_to_atoms(rho, space).matrix for rho in trajectory.states])
    return states, trajectory.diagnostics


def simulate(
    config: ScenarioConfig,
    model: Optional[ModelParams] = None,
    drive: Optional[DriveParams] = None,
) -> SimulationResult:
    """
    Evolve one realization and compute its concurrence trace.

    Args:
        config: Scenario
        model: Couplings to use instead of the nominal ones (disorder realizations)
        drive: Pre-resolved drive; resolved from the nominal model when omitted

    Raises:
        TruncationError: Tail overflow with an explicit cutoff, or after one escalation
        StiffnessError: Integrator failure
        ValidationError: Conservation check failure
    """
    model = model or config.model
    drive = drive if drive is not None else nominal_drive(config)
    check = not config.conserves_excitation

    cutoff = config.cutoff or auto_cutoff(config)
    try:
        states, diagnostics = _atom_states(config, model, drive, cutoff, check)
    except TruncationError as e:
        if config.cutoff is not None or cutoff >= MAX_CUTOFF:
            raise
        escalated = e.suggested_cutoff or min(2 * cutoff, MAX_CUTOFF)
        logger.warning(f"Cutoff {cutoff} insufficient (tail {e.max_tail:.2e}); retrying with {escalated}")
        cutoff = escalated
        states, diagnostics = _atom_states(config, model, drive, cutoff, check)

    trace = ConcurrenceTrace(
        times=config.grid.times(),
        scaled_times=config.grid.scaled_times(),
        values=concurrence_series(states),
        meta={"scenario_hash": config.scenario_hash(), "seed": config.seed, "realizations": 1},
    )
    return SimulationResult(trace, states, diagnostics, cutoff)

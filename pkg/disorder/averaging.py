"""
Quenched averaging of concurrence over coupling-disorder realizations.

The average is taken over concurrence values, never over states. Results are
stored per realization index before reduction, so the mean does not depend on
completion order or worker count.
"""

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from config import DEFAULT_WORKERS, WORKERS_ENV_VAR
from disorder.sampling import DisorderError, DisorderSpec, draw_deltas
from dynamics.engine import TrajectoryDiagnostics
from entanglement.concurrence import ConcurrenceTrace
from models.hamiltonians import apply_disorder
from scenarios.config import ConfigError, ScenarioConfig
from scenarios.simulation import nominal_drive, simulate
from utils.progress import ProgressTracker, format_duration

logger = logging.getLogger(__name__)


class RealizationError(RuntimeError):
    """Wraps the failure of one disorder realization."""

    def __init__(self, index: int, delta_a: float, delta_b: float, cause: BaseException):
        super().__init__(
            f"Realization {index} (delta_A={delta_a:.6g}, delta_B={delta_b:.6g}) failed: "
            f"{type(cause).__name__}: {cause}"
        )
        self.index = index
        self.delta_a = delta_a
        self.delta_b = delta_b
        self.cause = cause


@dataclass
class QuenchedResult:
    """Mean concurrence trace with per-sample standard error."""

    mean: ConcurrenceTrace
    stderr: np.ndarray
    n_realizations: int
    seed: int
    deltas: np.ndarray
    envelope: Tuple[np.ndarray, np.ndarray]
    diagnostics: TrajectoryDiagnostics = field(default_factory=TrajectoryDiagnostics)


def resolve_workers(workers: Optional[int] = None) -> int:
    """
    Worker count from the argument, then the environment, then the default.

    Raises:
        ConfigError: For a non-positive or non-integer count
    """
    source = "workers argument"
    if workers is None:
        raw = os.environ.get(WORKERS_ENV_VAR)
        if raw is None:
            return DEFAULT_WORKERS
        source = WORKERS_ENV_VAR
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigError(f"{source} must be a positive integer, got {raw!r}")
    if workers < 1:
        raise ConfigError(f"{source} must be a positive integer, got {workers}")
    return workers


def run_realization(config: ScenarioConfig, index: int, delta_a: float, delta_b: float):
    """
    One disordered run; module-level so worker processes can import it.

    Returns:
        Tuple (index, concurrence values, diagnostics)
    """
    model = apply_disorder(config.model, delta_a, delta_b)
    result = simulate(config, model=model, drive=nominal_drive(config))
    return index, result.trace.values, result.diagnostics


def _merge(total: TrajectoryDiagnostics, part: TrajectoryDiagnostics):
    total.absorb(part.max_trace_deviation, part.min_eigenvalue, part.max_tail_population)
    total.rhs_evaluations += part.rhs_evaluations
    total.propagator_steps += part.propagator_steps
    total.cutoff = max(total.cutoff, part.cutoff)


def quenched_average(
    config: ScenarioConfig,
    spec: Optional[DisorderSpec] = None,
    workers: Optional[int] = None,
    show_progress: bool = True,
) -> QuenchedResult:
    """
    Average the concurrence over independent disorder realizations.

    Args:
        config: Scenario with nominal couplings
        spec: Disorder plan; defaults to ``config.disorder``
        workers: Process count (1 = sequential); env override when omitted
        show_progress: Show a progress bar

    Returns:
        QuenchedResult

    Raises:
        DisorderError: If the disorder kind is none
        RealizationError: If any realization fails
    """
    spec = spec or config.disorder
    if not spec.is_active:
        raise DisorderError("quenched_average needs a disorder distribution (kind != none)")
    workers = resolve_workers(workers)

    n = spec.n_realizations
    deltas = np.array([draw_deltas(spec, i) for i in range(n)])
    samples = np.empty((n, config.grid.n_samples))
    diagnostics = TrajectoryDiagnostics()

    logger.info(
        f"Quenched average: {n} realizations of {spec.kind.value} disorder "
        f"(s={spec.s}, seed={spec.seed}) on {workers} worker(s)"
    )
    started = time.perf_counter()

    with ProgressTracker(n, desc="Realizations", enabled=show_progress) as progress:
        if workers == 1:
            for i, (delta_a, delta_b) in enumerate(deltas):
                try:
                    _, values, part = run_realization(config, i, delta_a, delta_b)
                except Exception as e:
                    raise RealizationError(i, delta_a, delta_b, e) from e
                samples[i] = values
                _merge(diagnostics, part)
                progress.update(1)
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                futures = {
                    executor.submit(run_realization, config, i, delta_a, delta_b): i
                    for i, (delta_a, delta_b) in enumerate(deltas)
                }
                for future in as_completed(futures):
                    i = futures[future]
                    try:
                        _, values, part = future.result()
                    except Exception as e:
                        for pending in futures:
                            pending.cancel()
                        raise RealizationError(i, deltas[i, 0], deltas[i, 1], e) from e
                    samples[i] = values
                    _merge(diagnostics, part)
                    progress.update(1)

    mean = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)

    logger.info(f"Quenched average finished in {format_duration(time.perf_counter() - started)}")

    trace = ConcurrenceTrace(
        times=config.grid.times(),
        scaled_times=config.grid.scaled_times(),
        values=mean,
        meta={"scenario_hash": config.scenario_hash(), "seed": spec.seed, "realizations": n},
    )
    return QuenchedResult(
        mean=trace,
        stderr=stderr,
        n_realizations=n,
        seed=spec.seed,
        deltas=deltas,
        envelope=(samples.min(axis=0), samples.max(axis=0)),
        diagnostics=diagnostics,
    )

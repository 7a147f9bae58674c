"""
Scenario runner: simulate (clean or disorder-averaged), detect events and write artifacts.
"""

import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from config import PACKAGE_VERSION
from disorder.averaging import quenched_average
from dynamics.engine import TrajectoryDiagnostics
from entanglement.analyzer import TraceAnalyzer
from entanglement.concurrence import ConcurrenceTrace
from entanglement.events import EsdEvent, detect_events
from scenarios.config import ScenarioConfig, format_config
from scenarios.simulation import simulate
from scenarios.writer import (
    RunManifest,
    artifact_paths,
    write_events,
    write_manifest,
    write_trace,
    write_trace_json,
)
from utils.progress import format_duration

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Outcome of one scenario run."""

    config: ScenarioConfig
    trace: ConcurrenceTrace
    events: List[EsdEvent]
    diagnostics: TrajectoryDiagnostics
    cutoff: int
    stderr: Optional[np.ndarray] = None
    n_realizations: int = 1
    started_at: str = ""
    wall_clock_seconds: float = 0.0
    metrics: Dict[str, float] = field(default_factory=dict)
    insights: List[str] = field(default_factory=list)
    files: Dict[str, Path] = field(default_factory=dict)


def run_scenario(
    config: ScenarioConfig,
    workers: Optional[int] = None,
    show_progress: bool = True,
) -> RunResult:
    """
    Simulate a scenario without writing anything.

    Disordered scenarios are quenched-averaged; the others run a single realization.
    """
    started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    started = time.perf_counter()
    logger.info(
        f"Running {config.name}: N={config.model.n_photon}, G_A={config.model.g_a:g}, "
        f"engine={config.engine}, driven={config.is_driven}, disorder={config.disorder.kind.value}"
    )

    if config.disorder.is_active:
        quenched = quenched_average(config, workers=workers, show_progress=show_progress)
        trace, stderr = quenched.mean, quenched.stderr
        diagnostics, n_realizations = quenched.diagnostics, quenched.n_realizations
        cutoff = diagnostics.cutoff
    else:
        single = simulate(config)
        trace, stderr = single.trace, None
        diagnostics, n_realizations, cutoff = single.diagnostics, 1, single.cutoff

    events = detect_events(trace)
    analyzer = TraceAnalyzer(trace, events)
    metrics = analyzer.calculate_metrics()

    elapsed = time.perf_counter() - started
    logger.info(
        f"{config.name}: cutoff {cutoff}, {len(events)} event(s), "
        f"max trace deviation {diagnostics.max_trace_deviation:.1e}, "
        f"finished in {format_duration(elapsed)}"
    )

    return RunResult(
        config=config,
        trace=trace,
        events=events,
        diagnostics=diagnostics,
        cutoff=cutoff,
        stderr=stderr,
        n_realizations=n_realizations,
        started_at=started_at,
        wall_clock_seconds=elapsed,
        metrics=metrics,
        insights=analyzer.generate_insights(metrics),
    )


def write_outputs(result: RunResult, directory=None) -> Dict[str, Path]:
    """
    Write trace, events, optional JSON mirror and, last, the manifest.
    """
    config = result.config
    directory = Path(directory or config.output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = artifact_paths(directory, config.prefix, config.output.formats)

    write_trace(paths["trace"], result.trace, result.stderr)
    write_events(paths["events"], result.events)
    if "trace_json" in paths:
        write_trace_json(paths["trace_json"], result.trace, result.stderr)

    manifest = RunManifest(
        scenario=config.name,
        version=PACKAGE_VERSION,
        config=format_config(config),
        config_hash=config.scenario_hash(),
        seed=config.seed,
        started_at=result.started_at,
        wall_clock_seconds=result.wall_clock_seconds,
        cutoff=result.cutoff,
        realizations=result.n_realizations,
        diagnostics=result.diagnostics.to_dict(),
        events=[e.to_dict() for e in result.events],
        metrics=result.metrics,
        files={key: path.name for key, path in paths.items()},
    )
    write_manifest(paths["manifest"], manifest)

    for key, path in paths.items():
        logger.info(f"Wrote {key}: {path}")
    result.files = paths
    return paths


def run(
    config: ScenarioConfig,
    workers: Optional[int] = None,
    show_progress: bool = True,
    directory=None,
) -> RunResult:
    """Run a scenario and write its artifacts."""
    result = run_scenario(config, workers=workers, show_progress=show_progress)
    write_outputs(result, directory)
    return result

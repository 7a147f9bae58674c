"""
Run artifact writers: trace CSV, events CSV, manifest JSON and optional JSON trace mirror.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from config import (
    EVENTS_SUFFIX,
    FLOAT_FORMAT,
    MANIFEST_SUFFIX,
    TRACE_JSON_SUFFIX,
    TRACE_SUFFIX,
)
from entanglement.concurrence import ConcurrenceTrace
from entanglement.events import EsdEvent

logger = logging.getLogger(__name__)

EVENT_COLUMNS = ["kind", "time", "scaled_time", "pre_slope", "post_slope"]


@dataclass
class RunManifest:
    """Record of a completed run."""

    scenario: str
    version: str
    config: str
    config_hash: str
    seed: int
    started_at: str
    wall_clock_seconds: float
    cutoff: int
    realizations: int
    diagnostics: Dict[str, float]
    events: List[dict]
    metrics: Dict[str, float] = field(default_factory=dict)
    files: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _jsonable(value):
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def write_trace(path: Path, trace: ConcurrenceTrace, stderr: Optional[np.ndarray] = None) -> Path:
    """Delimited text with header t, scaled_time, concurrence[, stderr]."""
    trace.to_frame(stderr).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_events(path: Path, events: Sequence[EsdEvent]) -> Path:
    """One event per row; the header is written even when there are no events."""
    frame = pd.DataFrame([e.to_dict() for e in events], columns=EVENT_COLUMNS)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def write_trace_json(path: Path, trace: ConcurrenceTrace, stderr: Optional[np.ndarray] = None) -> Path:
    """Key-value mirror of the trace file."""
    payload = {
        "meta": _jsonable(trace.meta),
        "columns": _jsonable(trace.to_frame(stderr).to_dict(orient="list")),
    }
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path


def write_manifest(path: Path, manifest: RunManifest) -> Path:
    path.write_text(json.dumps(_jsonable(manifest.to_dict()), indent=2) + "\n", encoding="utf-8")
    return path


def artifact_paths(directory, prefix: str, formats: Sequence[str]) -> Dict[str, Path]:
    directory = Path(directory)
    paths = {
        "trace": directory / f"{prefix}{TRACE_SUFFIX}",
        "events": directory / f"{prefix}{EVENTS_SUFFIX}",
        "manifest": directory / f"{prefix}{MANIFEST_SUFFIX}",
    }
    if "json" in formats:
        paths["trace_json"] = directory / f"{prefix}{TRACE_JSON_SUFFIX}"
    return paths

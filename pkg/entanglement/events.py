"""
Entanglement sudden death and revival detection on concurrence traces.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List

import numpy as np

from config import ESD_PERSISTENCE, ESD_THRESHOLD, MIN_EVENT_SAMPLES
from entanglement.concurrence import ConcurrenceTrace
from operators.validators import ValidationError, validate_uniform_grid

logger = logging.getLogger(__name__)


class EventKind(str, Enum):
    DEATH = "Death"
    REVIVAL = "Revival"


@dataclass(frozen=True)
class EsdEvent:
    """
    One alive/dead transition of the concurrence.

    ``time`` and ``scaled_time`` are linearly interpolated threshold crossings;
    ``pre_slope`` is the backward difference before the crossing and
    ``post_slope`` the forward difference after it.
    """

    kind: EventKind
    time: float
    scaled_time: float
    pre_slope: float
    post_slope: float

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "time": self.time,
            "scaled_time": self.scaled_time,
            "pre_slope": self.pre_slope,
            "post_slope": self.post_slope,
        }


def _crossing(x0: float, x1: float, v0: float, v1: float, threshold: float) -> float:
    if v0 == v1:
        return x1
    fraction = (v0 - threshold) / (v0 - v1)
    return x0 + min(max(fraction, 0.0), 1.0) * (x1 - x0)


def detect_events(
    trace: ConcurrenceTrace,
    threshold: float = ESD_THRESHOLD,
    persistence: int = ESD_PERSISTENCE,
) -> List[EsdEvent]:
    """
    Scan a trace for sudden deaths and revivals.

    A transition at sample k counts only when the new state (value <= threshold
    for dead, > threshold for alive) holds for ``persistence`` consecutive samples
    starting at k. Shorter excursions are treated as ripple.

    Args:
        trace: Uniformly sampled concurrence trace
        threshold: Dead/alive boundary
        persistence: Samples the new state must persist

    Returns:
        Events sorted by time

    Raises:
        ValidationError: For fewer than 5 samples or a non-uniform grid
    """
    values = trace.values
    n = len(values)
    if n < MIN_EVENT_SAMPLES:
        raise ValidationError(f"Event detection needs at least {MIN_EVENT_SAMPLES} samples, got {n}")

    problems = validate_uniform_grid(trace.times)
    if problems:
        raise ValidationError("; ".join(problems))

    times, scaled = trace.times, trace.scaled_times
    dt = times[1] - times[0]
    alive = values > threshold

    events = []
    state = "ALIVE" if alive[0] else "DEAD"

    for k in range(1, n):
        now_alive = bool(alive[k])
        if (state == "ALIVE") == now_alive:
            continue

        run = alive[k:k + persistence]
        if len(run) < persistence or np.any(run != now_alive):
            continue

        kind = EventKind.REVIVAL if now_alive else EventKind.DEATH
        pre_slope = (values[k - 1] - values[k - 2]) / dt if k >= 2 else (values[k] - values[k - 1]) / dt
        post_slope = (values[k + 1] - values[k]) / dt if k + 1 < n else (values[k] - values[k - 1]) / dt

        events.append(EsdEvent(
            kind=kind,
            time=_crossing(times[k - 1], times[k], values[k - 1], values[k], threshold),
            scaled_time=_crossing(scaled[k - 1], scaled[k], values[k - 1], values[k], threshold),
            pre_slope=float(pre_slope),
            post_slope=float(post_slope),
        ))
        state = "ALIVE" if now_alive else "DEAD"

    if events:
        deaths = sum(1 for e in events if e.kind is EventKind.DEATH)
        logger.debug(f"Detected {deaths} deaths and {len(events) - deaths} revivals")

    return events

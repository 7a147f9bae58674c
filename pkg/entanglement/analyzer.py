"""
Concurrence trace analytics and insights
"""

import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from config import ESD_THRESHOLD
from entanglement.concurrence import ConcurrenceTrace
from entanglement.events import EsdEvent, EventKind, detect_events
from operators.validators import ValidationError

logger = logging.getLogger(__name__)


def max_pointwise_gap(first: ConcurrenceTrace, second: ConcurrenceTrace) -> float:
    """
    Largest |C_1(x) - C_2(x)| over samples shared by both traces.

    Raises:
        ValidationError: If the traces are sampled differently
    """
    if len(first) != len(second) or not np.allclose(first.scaled_times, second.scaled_times):
        raise ValidationError("Traces must share their sample instants")
    return float(np.max(np.abs(first.values - second.values)))


class TraceAnalyzer:
    """
    Analyze a concurrence trace and its sudden death / revival events.
    """

    def __init__(
        self,
        trace: ConcurrenceTrace,
        events: Optional[Sequence[EsdEvent]] = None,
        threshold: float = ESD_THRESHOLD,
    ):
        """
        Initialize analyzer.

        Args:
            trace: Concurrence trace
            events: Pre-computed events; detected from the trace when omitted
            threshold: Dead/alive boundary
        """
        self.trace = trace
        self.threshold = threshold
        self.events = list(events) if events is not None else detect_events(trace, threshold)

    def amplitude(self, start: float, end: float) -> float:
        """Peak-to-trough amplitude over the scaled-time window [start, end]."""
        values = self.trace.window(start, end)
        if values.size == 0:
            return math.nan
        return float(values.max() - values.min())

    def dead_time(self) -> float:
        """Total scaled time spent at or below the threshold."""
        scaled = self.trace.scaled_times
        if len(scaled) < 2:
            return 0.0
        step = scaled[1] - scaled[0]
        return float(np.count_nonzero(self.trace.values <= self.threshold) * step)

    def first_revival_time(self, tolerance: float = 1e-3, dip: float = 0.1) -> float:
        """
        Scaled time of the first full revival.

        A full revival is the first local maximum, after the trace has fallen at
        least ``dip`` below its initial value, that comes back within ``tolerance``
        of the initial value. Interior peaks are refined by a parabola through the
        three samples around the maximum.

        Returns:
            Scaled time, or nan when the trace never fully revives
        """
        values = self.trace.values
        scaled = self.trace.scaled_times
        initial = values[0]

        dipped = np.nonzero(values < initial - dip)[0]
        if dipped.size == 0:
            return math.nan

        last = len(values) - 1
        for k in range(int(dipped[0]) + 1, len(values)):
            if values[k] < initial - tolerance:
                continue
            if k < last and values[k + 1] > values[k]:
                continue
            if values[k - 1] > values[k]:
                continue
            if k == last:
                return float(scaled[k])

            v0, v1, v2 = values[k - 1], values[k], values[k + 1]
            curvature = v0 - 2.0 * v1 + v2
            step = scaled[k] - scaled[k - 1]
            shift = 0.5 * (v0 - v2) / curvature if curvature != 0 else 0.0
            return float(scaled[k] + shift * step)

        return math.nan

    def calculate_metrics(self) -> Dict[str, float]:
        """Calculate summary metrics of the trace."""
        values = self.trace.values
        scaled = self.trace.scaled_times
        deaths = [e for e in self.events if e.kind is EventKind.DEATH]
        revivals = [e for e in self.events if e.kind is EventKind.REVIVAL]

        metrics = {
            "initial_value": float(values[0]),
            "final_value": float(values[-1]),
            "min_value": float(values.min()),
            "max_value": float(values.max()),
            "mean_value": float(values.mean()),
            "n_deaths": len(deaths),
            "n_revivals": len(revivals),
            "death_onset": deaths[0].scaled_time if deaths else math.nan,
            "dead_time": self.dead_time(),
            "first_revival_time": self.first_revival_time(),
        }

        # Early/late oscillation amplitudes over one scaled-time unit each
        span = scaled[-1] - scaled[0]
        window = min(1.0, span / 2.0)
        metrics["early_amplitude"] = self.amplitude(scaled[0], scaled[0] + window)
        metrics["late_amplitude"] = self.amplitude(scaled[-1] - window, scaled[-1])
        return metrics

    def generate_insights(self, metrics: Dict[str, float]) -> List[str]:
        """Generate textual insights from metrics."""
        insights = []

        if metrics["n_deaths"] == 0:
            insights.append(f"No sudden death; concurrence stays above {self.threshold:.0e}")
        else:
            insights.append(
                f"{metrics['n_deaths']} sudden death(s), first at scaled time "
                f"{metrics['death_onset']:.4f}; dead for {metrics['dead_time']:.4f} in total"
            )
            if metrics["n_revivals"] > 0:
                insights.append(f"{metrics['n_revivals']} revival(s) after sudden death")
            else:
                insights.append("Entanglement does not revive within the sampled window")

        if not math.isnan(metrics["first_revival_time"]):
            insights.append(
                f"Full revival to {metrics['initial_value']:.4f} at scaled time "
                f"{metrics['first_revival_time']:.4f}"
            )

        early, late = metrics["early_amplitude"], metrics["late_amplitude"]
        if early > 0 and late <= 0.5 * early:
            insights.append(f"Oscillations wash out: late amplitude {late:.3f} vs early {early:.3f}")

        return insights

#!/usr/bin/env python3
"""
Test concurrence, sudden death / revival detection and trace analytics
"""

import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from entanglement.analyzer import TraceAnalyzer, max_pointwise_gap
from entanglement.concurrence import (
    ConcurrenceTrace,
    TwoQubitState,
    concurrence,
    concurrence_series,
    pure_state_concurrence,
    reduce_to_atoms,
)
from entanglement.events import EventKind, detect_events
from models.params import InitialStateSpec, StateCase
from models.states import atomic_amplitudes, atomic_density, initial_state
from operators.hilbert import HilbertSpace, LayoutError
from operators.validators import ValidationError

BELL = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2)


def werner(p):
    return p * np.outer(BELL, BELL) + (1 - p) * np.eye(4) / 4


def make_trace(t, values):
    t = np.asarray(t, dtype=float)
    return ConcurrenceTrace(times=t, scaled_times=t / (2 * math.pi), values=values)


@pytest.mark.parametrize("method", ["hermitian", "direct"])
def test_bell_and_product_states(method):
    assert concurrence(np.outer(BELL, BELL), method) == pytest.approx(1.0, abs=1e-6)
    product = np.kron([1.0, 0.0], [0.0, 1.0])
    assert concurrence(np.outer(product, product), method) == pytest.approx(0.0, abs=1e-6)
    assert concurrence(np.eye(4) / 4, method) == 0.0


@pytest.mark.parametrize("p,expected", [(0.6, 0.4), (1.0, 1.0), (1 / 3, 0.0), (0.2, 0.0)])
def test_werner_states(p, expected):
    assert concurrence(werner(p)) == pytest.approx(expected, abs=1e-6)
    assert concurrence(werner(p), "direct") == pytest.approx(expected, abs=1e-6)


def test_pure_state_formula():
    rng = np.random.default_rng(7)
    for _ in range(20):
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        assert concurrence(TwoQubitState.from_ket(psi)) == pytest.approx(pure_state_concurrence(psi), abs=1e-6)


def test_initial_state_concurrence():
    for case in StateCase:
        spec = InitialStateSpec(alpha=math.pi / 6, case=case)
        assert concurrence(atomic_density(spec)) == pytest.approx(math.sin(math.pi / 3), abs=1e-6)
        assert pure_state_concurrence(atomic_amplitudes(spec)) == pytest.approx(0.8660254, abs=1e-7)


def test_local_unitaries_leave_concurrence_unchanged():
    rho = werner(0.8)
    reference = concurrence(rho)
    for seed in range(5):
        u = np.kron(unitary_group.rvs(2, random_state=seed), unitary_group.rvs(2, random_state=seed + 100))
        assert concurrence(u @ rho @ u.conj().T) == pytest.approx(reference, abs=1e-8)


def test_concurrence_input_checks():
    with pytest.raises(ValidationError):
        concurrence(np.triu(np.ones((4, 4))) / 4)
    with pytest.raises(LayoutError):
        concurrence(np.eye(2) / 2)
    with pytest.raises(ValueError):
        concurrence(np.eye(4) / 4, method="numeric")


def test_reduce_to_atoms():
    space = HilbertSpace.double_jc(3)
    spec = InitialStateSpec(case=StateCase.SUDDEN_DEATH)
    reduced = reduce_to_atoms(initial_state(spec, space), space)
    assert np.allclose(reduced.matrix, atomic_density(spec))
    assert reduced.validate()

    with pytest.raises(LayoutError):
        reduce_to_atoms(initial_state(spec, space), HilbertSpace.double_jc(2))


def test_concurrence_series():
    states = np.stack([werner(p) for p in (1.0, 0.6, 0.2)])
    assert np.allclose(concurrence_series(states), [1.0, 0.4, 0.0], atol=1e-6)


def test_trace_checks_and_accessors():
    t = np.linspace(0, math.pi, 11)
    trace = make_trace(t, np.cos(t) ** 2)
    assert len(trace) == 11
    assert trace.at(0.0) == pytest.approx(1.0)
    assert trace.window(0.0, 0.12).size == 3
    frame = trace.to_frame(stderr=np.zeros(11))
    assert list(frame.columns) == ["t", "scaled_time", "concurrence", "stderr"]

    with pytest.raises(ValidationError):
        make_trace(t, np.full(11, 1.01))
    with pytest.raises(ValidationError):
        make_trace(t, np.full(11, -0.1))
    with pytest.raises(ValidationError):
        ConcurrenceTrace(t, t, np.zeros(10))


def test_sudden_death_and_revival_of_clipped_oscillation():
    t = np.linspace(0, math.pi, 2001)
    trace = make_trace(t, np.maximum(0.0, np.cos(t) ** 2 - 0.25))

    events = detect_events(trace)
    assert [e.kind for e in events] == [EventKind.DEATH, EventKind.REVIVAL]
    death, revival = events
    assert death.time == pytest.approx(math.pi / 3, abs=2e-3)
    assert revival.time == pytest.approx(2 * math.pi / 3, abs=2e-3)
    assert death.scaled_time == pytest.approx(death.time / (2 * math.pi))
    assert death.pre_slope < 0
    assert death.post_slope == pytest.approx(0.0, abs=1e-3)
    assert revival.pre_slope == pytest.approx(0.0, abs=1e-3)
    assert revival.post_slope > 0
    assert revival.to_dict()["kind"] == "Revival"


def test_ripple_shorter_than_persistence_is_ignored():
    values = np.full(50, 0.5)
    values[20:22] = 0.0
    trace = make_trace(np.linspace(0, 1, 50), values)
    assert detect_events(trace) == []


def test_trace_starting_dead():
    values = np.concatenate([np.zeros(10), np.linspace(0.01, 0.5, 40)])
    events = detect_events(make_trace(np.linspace(0, 1, 50), values))
    assert [e.kind for e in events] == [EventKind.REVIVAL]


def test_event_detection_input_checks():
    with pytest.raises(ValidationError):
        detect_events(make_trace(np.linspace(0, 1, 4), np.ones(4) * 0.5))
    with pytest.raises(ValidationError):
        detect_events(make_trace(np.array([0.0, 0.1, 0.2, 0.4, 0.5, 0.6]), np.ones(6) * 0.5))


def test_analyzer_metrics_of_clean_oscillation():
    t = np.linspace(0, 2 * math.pi, 1001)
    trace = make_trace(t, math.sin(math.pi / 3) * np.cos(t) ** 2)
    analyzer = TraceAnalyzer(trace)
    metrics = analyzer.calculate_metrics()

    assert metrics["initial_value"] == pytest.approx(0.8660254, abs=1e-7)
    assert metrics["n_deaths"] == 0
    assert math.isnan(metrics["death_onset"])
    assert metrics["first_revival_time"] == pytest.approx(0.5, abs=1e-4)
    assert metrics["early_amplitude"] == pytest.approx(0.8660254, abs=1e-3)

    insights = analyzer.generate_insights(metrics)
    assert any("No sudden death" in line for line in insights)
    assert any("Full revival" in line for line in insights)


def test_analyzer_dead_time():
    t = np.linspace(0, math.pi, 2001)
    trace = make_trace(t, np.maximum(0.0, np.cos(t) ** 2 - 0.25))
    analyzer = TraceAnalyzer(trace)
    metrics = analyzer.calculate_metrics()
    assert metrics["n_deaths"] == 1 and metrics["n_revivals"] == 1
    # dead on [pi/3, 2pi/3] in t, i.e. 1/6 in scaled time
    assert metrics["dead_time"] == pytest.approx(1 / 6, abs=2e-3)


def test_max_pointwise_gap():
    t = np.linspace(0, 1, 11)
    first = make_trace(t, np.full(11, 0.5))
    second = make_trace(t, np.linspace(0.5, 0.7, 11))
    assert max_pointwise_gap(first, second) == pytest.approx(0.2)
    with pytest.raises(ValidationError):
        max_pointwise_gap(first, make_trace(np.linspace(0, 1, 12), np.zeros(12)))

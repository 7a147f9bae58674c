#!/usr/bin/env python3
"""
Test scenario configuration, presets, single-run simulation, artifacts and sweeps
"""

import json
import logging
import math

import numpy as np
import pandas as pd
import pytest

from entanglement.analyzer import TraceAnalyzer, max_pointwise_gap
from entanglement.events import EventKind, detect_events
from models.hamiltonians import TruncationError
from scenarios.config import (
    ConfigError,
    apply_overrides,
    config_from_dict,
    format_config,
    load_config,
    parse_angle,
    parse_config,
    with_output,
)
from scenarios.presets import CATALOG, PLACEHOLDER_NOTE, catalog_frame, get_preset, preset_config
from scenarios.runner import run, run_scenario
from scenarios.simulation import auto_cutoff, nominal_drive, simulate
from scenarios.sweep import ParameterSweep, parse_grid_spec

MINIMAL = """
[scenario]
name = "minimal"
"""

THERMAL = """
[scenario]
name = "thermal"

[model]
omega0 = 1.0
omega = 1.0

[noise]
kappa = 0.05
n_th = 0.5

[grid]
t_end = 1.0
n_samples = 201
"""


def short(config, t_end=1.0, n_samples=201):
    return apply_overrides(config, [f"grid.t_end={t_end}", f"grid.n_samples={n_samples}"])


# Configuration

def test_parse_defaults():
    config = parse_config(MINIMAL)
    assert config.name == "minimal"
    assert config.model.g_b == 1.0
    assert config.model.n_photon == 1
    assert config.model.frame == "lab"
    assert config.cutoff is None
    assert config.engine == "factorized"
    assert config.drive is None
    assert config.grid.t_end == 5.0
    assert config.grid.n_samples == 1001
    assert config.initial.alpha == pytest.approx(0.5235988, abs=1e-7)
    assert not config.disorder.is_active
    assert config.output.formats == ("csv",)
    assert config.prefix == "minimal"


def test_parse_angle_literals():
    assert parse_angle("pi/6") == pytest.approx(math.pi / 6)
    assert parse_angle("2*pi/3") == pytest.approx(2 * math.pi / 3)
    assert parse_angle("-pi") == pytest.approx(-math.pi)
    assert parse_angle(0.25) == 0.25
    assert parse_angle("0.5") == 0.5
    with pytest.raises(ValueError):
        parse_angle("tau/2")


def test_values_normalized_to_reference_coupling():
    config = config_from_dict({
        "model": {"g_b": 2.0, "g_a": 1.8, "omega0": 2.0, "omega": 2.0},
        "noise": {"kappa": 0.2, "gamma_b": 0.1, "n_th": 0.5},
        "drive": {"epsilon": 0.08, "m_order": 1, "delta_p": 0.4},
    })
    assert config.model.g_a == pytest.approx(0.9)
    assert config.model.g_b == 1.0
    assert config.model.omega0 == pytest.approx(1.0)
    assert config.noise.kappa_a == pytest.approx(0.1)
    assert config.noise.gamma_b == pytest.approx(0.05)
    assert config.noise.gamma_a == 0.0
    assert config.noise.n_th == 0.5
    assert config.drive.epsilon == pytest.approx(0.04)
    assert config.drive.delta_p == pytest.approx(0.2)
    assert config.model.frame == "rotating"


@pytest.mark.parametrize("text,field", [
    ('[model]\ng_a = 1.0\ncolour = "red"\n', "model.colour"),
    ('[disorder]\nkind = "gaussian"\n', "disorder.s"),
    ('[model]\nframe = "lab"\n[drive]\nepsilon = 0.01\n', "model.frame"),
    ('[model]\nn_photon = 1\n[drive]\nm_order = 2\nresonant = true\n', "drive.m_order"),
    ('[model]\nn_photon = 2\n[drive]\nresonant = true\ndelta_p = 0.1\n', "drive.delta_p"),
    ('[model]\nn_photon = 3\ncutoff = 3\n', "model.cutoff"),
    ('[model]\nunits = "hz"\n', "model.units"),
    ('[initial]\nalpha = "pi/x"\n', "initial.alpha"),
    ('[output]\nformats = ["csv", "parquet"]\n', "output.formats"),
    ('[grid]\nn_samples = 1\n', "grid.n_samples"),
    ('[noise]\nkappa = -0.1\n', "noise.kappa"),
])
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.field_path == field


def test_config_error_reports_line():
    with pytest.raises(ConfigError) as exc:
        parse_config('[scenario]\nname = "x"\n\n[model]\ng_a = 1.0\ncolour = "red"\n')
    assert exc.value.line == 6
    assert "line 6" in str(exc.value)


def test_unknown_section_and_bad_toml():
    with pytest.raises(ConfigError):
        parse_config("[plot]\ncolour = 1\n")
    with pytest.raises(ConfigError):
        parse_config("[model\n")


@pytest.mark.parametrize("text", [
    MINIMAL,
    THERMAL,
    '[model]\nomega0 = 2.0\nn_photon = 2\ncutoff = 9\n[drive]\nepsilon = 0.01\nm_order = 2\ndelta_p = 0.3\nchi = "pi/4"\n',
    '[disorder]\nkind = "gaussian"\ns = 0.25\nn_realizations = 10\nper_cavity_independent = false\n'
    '[output]\nformats = ["json"]\nprefix = "g"\n',
    '[noise]\nkappa_a = 0.1\ngamma_b = 0.2\ngamma_phi = 0.01\n[initial]\ncase = "sudden_death"\nalpha = 0.3\n',
])
def test_format_parse_round_trip(text):
    config = parse_config(text)
    assert parse_config(format_config(config)) == config


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_presets_round_trip(name):
    config = get_preset(name).config()
    assert parse_config(format_config(config)) == config


def test_load_config(tmp_path):
    path = tmp_path / "thermal.toml"
    path.write_text(THERMAL)
    assert load_config(path) == parse_config(THERMAL)


def test_overrides():
    config = parse_config(THERMAL)
    updated = apply_overrides(config, ["noise.kappa=0.1", "initial.alpha=pi/4", "scenario.name=\"other\""])
    assert updated.noise.kappa_a == 0.1 and updated.noise.kappa_b == 0.1
    assert updated.initial.alpha == pytest.approx(math.pi / 4)
    assert updated.name == "other"

    with pytest.raises(ConfigError):
        apply_overrides(config, ["noise.kappa"])
    with pytest.raises(ConfigError):
        apply_overrides(config, ["noise.colour=1"])
    with pytest.raises(ConfigError):
        apply_overrides(config, ["grid.n_samples=1"])


def test_drive_overrides_switch_resonance():
    config = preset_config("fig3a")
    assert config.drive.resonant
    detuned = apply_overrides(config, ["drive.delta_p=0.2"])
    assert not detuned.drive.resonant
    assert detuned.drive.delta_p == 0.2
    again = apply_overrides(detuned, ["drive.resonant=true"])
    assert again.drive.resonant


def test_scenario_hash():
    config = parse_config(THERMAL)
    assert config.scenario_hash() == parse_config(THERMAL).scenario_hash()
    assert len(config.scenario_hash()) == 16
    assert apply_overrides(config, ["noise.n_th=0.6"]).scenario_hash() != config.scenario_hash()


def test_with_output():
    config = with_output(parse_config(MINIMAL), directory="/tmp/out", prefix="run1")
    assert config.output.directory == "/tmp/out"
    assert config.prefix == "run1"


# Presets

def test_catalog_contents():
    expected = {f"fig1{s}" for s in "abcd"} | {f"fig2{s}" for s in "abcdef"} | {
        "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b",
    }
    assert set(CATALOG) == expected

    frame = catalog_frame()
    assert len(frame) == len(expected)
    assert {"name", "n_photon", "epsilon", "disorder", "note"} <= set(frame.columns)


def test_preset_parameters():
    fig1b = preset_config("fig1b")
    assert fig1b.model.g_a == 0.9
    assert fig1b.initial.case.value == "no_sudden_death"

    fig2f = get_preset("fig2f")
    assert fig2f.default_variant == "thermal"
    assert fig2f.note == PLACEHOLDER_NOTE
    assert PLACEHOLDER_NOTE == "paper value unreadable — default supplied"
    config = fig2f.config()
    assert config.model.n_photon == 3
    assert config.noise.n_th == 0.5
    assert fig2f.config("kappa_scaled").noise.kappa_a == pytest.approx(0.05 / 3)

    fig4a = preset_config("fig4a", "n3m1")
    assert fig4a.drive.epsilon == 0.04
    assert (fig4a.model.n_photon, fig4a.drive.m_order) == (3, 1)
    assert fig4a.model.frame == "rotating"
    assert get_preset("fig4a").note == ""

    fig5b = preset_config("fig5b", "n2")
    assert fig5b.disorder.kind.value == "gaussian"
    assert fig5b.disorder.s == 0.25
    assert fig5b.disorder.n_realizations == 1000
    assert fig5b.model.n_photon == 2


def test_preset_errors():
    with pytest.raises(ConfigError):
        get_preset("fig9z")
    with pytest.raises(ConfigError):
        get_preset("fig1a").config("storm")


def test_preset_variant_names_scenario():
    assert preset_config("fig1a").name == "fig1a"
    assert preset_config("fig1a", "kappa").name == "fig1a_kappa"
    assert preset_config("fig1a", overrides=["model.g_a=0.8"]).model.g_a == 0.8


# Simulation

def test_auto_cutoff():
    assert auto_cutoff(preset_config("fig1a")) == 3
    assert auto_cutoff(preset_config("fig2c")) == 6
    assert auto_cutoff(preset_config("fig2e")) == 8
    assert auto_cutoff(preset_config("fig3b")) == 8


def test_nominal_drive_resolves_resonance():
    drive = nominal_drive(preset_config("fig3b"))
    assert not drive.resonant
    assert drive.delta_p == pytest.approx(-math.sqrt(6) / 3)
    assert nominal_drive(preset_config("fig1a")) is None


def test_fig1a_clean_oscillation():
    result = simulate(short(preset_config("fig1a")))
    trace = result.trace
    assert trace.values[0] == pytest.approx(0.866025, abs=1e-6)
    # C(t) = sin(2 alpha) cos^2(G t): zero at x = 1/4, full revival at x = 1/2
    expected = math.sin(math.pi / 3) * np.cos(trace.times) ** 2
    assert np.allclose(trace.values, expected, atol=1e-6)
    assert detect_events(trace) == []
    assert result.cutoff == 3
    assert trace.meta["realizations"] == 1


def test_fig1b_full_revival_at_end_of_window():
    trace = simulate(preset_config("fig1b")).trace
    assert trace.values[-1] == pytest.approx(0.866025, abs=1e-5)
    assert TraceAnalyzer(trace).first_revival_time() == pytest.approx(5.0, abs=1e-9)


def test_factorized_and_full_engines_agree():
    config = short(preset_config("fig1d", "kappa"), t_end=0.3, n_samples=31)
    config = apply_overrides(config, ["noise.gamma_phi=0.02"])
    factorized = simulate(config)
    full = simulate(apply_overrides(config, ['grid.engine="full"']))
    assert max_pointwise_gap(factorized.trace, full.trace) < 1e-6


def test_damped_concurrence_closed_form():
    config = short(preset_config("fig1a", "kappa"), t_end=1.0, n_samples=101)
    trace = simulate(config).trace
    kappa = 0.05
    w = math.sqrt(1.0 - kappa ** 2 / 16)
    t = trace.times
    amplitude = np.exp(-kappa * t / 4) * (np.cos(w * t) + kappa / (4 * w) * np.sin(w * t))
    assert np.allclose(trace.values, math.sin(math.pi / 3) * amplitude ** 2, atol=1e-6)


def test_thermal_noise_causes_sudden_death():
    trace = simulate(parse_config(THERMAL)).trace
    kinds = [e.kind for e in detect_events(trace)]
    assert EventKind.DEATH in kinds
    assert EventKind.REVIVAL in kinds
    assert kinds[0] is EventKind.DEATH

    cold = apply_overrides(parse_config(THERMAL), ["noise.n_th=0.0"])
    assert detect_events(simulate(cold).trace) == []


def damped_concurrence(t, rate, n_photon, on_atom):
    """sin(2 alpha) |c_e(t)|^2 with amplitude damping on |e,0> (atom) or on |l,N> (cavity)."""
    w = math.sqrt(math.factorial(n_photon) - rate ** 2 / 16)
    sign = -1.0 if on_atom else 1.0
    amplitude = np.exp(-rate * t / 4) * (np.cos(w * t) + sign * rate / (4 * w) * np.sin(w * t))
    return math.sin(math.pi / 3) * amplitude ** 2


def test_multiphoton_decay_symmetry_restored_by_scaling():
    variants = ("kappa", "gamma", "kappa_scaled", "gamma_scaled")
    traces = {variant: simulate(preset_config("fig2e", variant)).trace for variant in variants}
    t = traces["kappa"].times
    rate = 0.05

    # |l,2> loses its photons at 2 kappa
    expected = {
        "kappa": damped_concurrence(t, 2 * rate, 2, on_atom=False),
        "kappa_scaled": damped_concurrence(t, rate, 2, on_atom=False),
        "gamma": damped_concurrence(t, rate, 2, on_atom=True),
        "gamma_scaled": damped_concurrence(t, 2 * rate, 2, on_atom=True),
    }
    for variant, trace in traces.items():
        assert np.allclose(trace.values, expected[variant], atol=1e-6)

    def bound(damping):
        # equal damping on either side only flips the sign of the sine term
        return math.sin(math.pi / 3) * damping / (2 * math.sqrt(2 - damping ** 2 / 16))

    assert max_pointwise_gap(traces["kappa_scaled"], traces["gamma"]) <= bound(rate) + 1e-6
    assert max_pointwise_gap(traces["kappa"], traces["gamma_scaled"]) <= bound(2 * rate) + 1e-6
    assert max_pointwise_gap(traces["kappa"], traces["gamma"]) > 5 * bound(rate)


def test_three_photon_revival_is_faster_than_two_photon():
    two = TraceAnalyzer(simulate(preset_config("fig2a")).trace).first_revival_time()
    three_photon = preset_config("fig2a", overrides=["model.n_photon=3", "model.omega0=3.0"])
    three = TraceAnalyzer(simulate(three_photon).trace).first_revival_time()

    # C = sin(2 alpha) cos^2(sqrt(N!) G t): full revival at x = 1 / (2 sqrt(N!))
    assert two == pytest.approx(1 / (2 * math.sqrt(2)), abs=2e-3)
    assert three == pytest.approx(1 / (2 * math.sqrt(6)), abs=2e-3)
    assert three < two


@pytest.mark.parametrize("variant", ["n2m1", "n3m1"])
def test_pump_causes_sudden_death_without_noise(variant):
    config = preset_config("fig3a", variant)
    assert config.noise.is_clean
    events = detect_events(simulate(config).trace)
    kinds = {e.kind for e in events}
    assert kinds == {EventKind.DEATH, EventKind.REVIVAL}
    assert events[0].kind is EventKind.DEATH


@pytest.mark.parametrize("name,variant", [("fig3a", "n2m2"), ("fig3b", "n3m3")])
def test_pump_deviation_grows_with_strength(name, variant):
    gaps = []
    for epsilon in (0.01, 0.04):
        driven = preset_config(name, variant, overrides=[
            f"drive.epsilon={epsilon}", "grid.t_end=2.0", "grid.n_samples=2001",
        ])
        silent = apply_overrides(driven, ["drive.epsilon=0.0"])
        gaps.append(max_pointwise_gap(simulate(driven).trace, simulate(silent).trace))
    assert gaps[1] > gaps[0] > 0


def test_unpumped_drive_matches_rotating_frame():
    driven = short(preset_config("fig4a"), t_end=0.5, n_samples=101)
    silent = apply_overrides(driven, ["drive.epsilon=0.0"])
    undriven = config_from_dict({
        "model": {"omega0": 2.0, "omega": 1.0, "n_photon": 2, "frame": "rotating"},
        "grid": {"t_end": 0.5, "n_samples": 101},
    })
    assert max_pointwise_gap(simulate(silent).trace, simulate(undriven).trace) < 1e-6
    assert max_pointwise_gap(simulate(driven).trace, simulate(undriven).trace) > 1e-3


def test_explicit_cutoff_too_small_raises():
    config = apply_overrides(parse_config(THERMAL), [
        "model.cutoff=3", "noise.kappa=0.5", "noise.n_th=2.0", "grid.t_end=0.2", "grid.n_samples=11",
    ])
    with pytest.raises(TruncationError) as exc:
        simulate(config)
    assert exc.value.suggested_cutoff == 6


def test_auto_cutoff_escalates_once(caplog):
    config = apply_overrides(parse_config(THERMAL), [
        "noise.kappa=0.5", "noise.n_th=0.3", "grid.t_end=0.5", "grid.n_samples=51",
    ])
    with caplog.at_level(logging.WARNING):
        result = simulate(config)
    assert result.cutoff == 16
    assert "retrying with 16" in caplog.text


# Runner, artifacts and sweeps

def test_run_writes_artifacts(tmp_path):
    config = apply_overrides(parse_config(THERMAL), ['output.formats=["csv", "json"]'])
    result = run(config, show_progress=False, directory=tmp_path)

    trace = pd.read_csv(tmp_path / "thermal_trace.csv")
    assert list(trace.columns) == ["t", "scaled_time", "concurrence"]
    assert len(trace) == 201
    assert trace["concurrence"].iloc[0] == pytest.approx(0.866025, abs=1e-6)

    events = pd.read_csv(tmp_path / "thermal_events.csv")
    assert list(events.columns) == ["kind", "time", "scaled_time", "pre_slope", "post_slope"]
    assert len(events) == len(result.events)

    manifest = json.loads((tmp_path / "thermal_manifest.json").read_text())
    assert manifest["config_hash"] == config.scenario_hash()
    assert manifest["cutoff"] == result.cutoff
    assert manifest["realizations"] == 1
    assert parse_config(manifest["config"]) == config
    assert set(manifest["files"]) == {"trace", "events", "manifest", "trace_json"}

    mirror = json.loads((tmp_path / "thermal_trace.json").read_text())
    assert mirror["meta"]["scenario_hash"] == config.scenario_hash()
    assert len(mirror["columns"]["concurrence"]) == 201


def test_events_file_has_header_without_events(tmp_path):
    run(short(preset_config("fig1a"), t_end=0.2, n_samples=21), show_progress=False, directory=tmp_path)
    header = (tmp_path / "fig1a_events.csv").read_text().splitlines()
    assert header == ["kind,time,scaled_time,pre_slope,post_slope"]


def test_disordered_run_reports_stderr(tmp_path):
    config = short(preset_config("fig5a"), t_end=0.2, n_samples=21)
    config = apply_overrides(config, ["disorder.n_realizations=3"])
    result = run(config, workers=1, show_progress=False, directory=tmp_path)
    assert result.n_realizations == 3
    trace = pd.read_csv(tmp_path / "fig5a_trace.csv")
    assert list(trace.columns) == ["t", "scaled_time", "concurrence", "stderr"]


def test_run_scenario_metrics():
    result = run_scenario(short(preset_config("fig1a")), show_progress=False)
    assert result.metrics["n_deaths"] == 0
    assert result.metrics["first_revival_time"] == pytest.approx(0.5, abs=1e-4)
    assert result.files == {}


def test_trace_file_independent_of_worker_count(tmp_path):
    config = short(preset_config("fig5a"), t_end=0.2, n_samples=21)
    config = apply_overrides(config, ["disorder.n_realizations=4"])
    run(config, workers=1, show_progress=False, directory=tmp_path / "one")
    run(config, workers=2, show_progress=False, directory=tmp_path / "two")
    one = (tmp_path / "one" / "fig5a_trace.csv").read_bytes()
    two = (tmp_path / "two" / "fig5a_trace.csv").read_bytes()
    assert one == two


PRESET_VARIANTS = [(name, variant) for name, preset in sorted(CATALOG.items()) for variant in preset.variants]


@pytest.mark.parametrize("name,variant", PRESET_VARIANTS)
def test_every_preset_conserves_trace_and_positivity(name, variant):
    config = preset_config(name, variant)
    if config.disorder.is_active:
        config = apply_overrides(config, ["disorder.n_realizations=3"])
    result = run_scenario(config, workers=1, show_progress=False)
    assert result.diagnostics.max_trace_deviation <= 1e-7
    assert result.diagnostics.min_eigenvalue >= -1e-7
    assert np.all(result.trace.values >= 0)
    assert np.all(result.trace.values <= 1 + 1e-9)


def test_parse_grid_spec():
    assert parse_grid_spec("noise.n_th=0,0.5") == ("noise.n_th", [0, 0.5])
    assert parse_grid_spec("grid.engine=factorized,full") == ("grid.engine", ["factorized", "full"])
    with pytest.raises(ConfigError):
        parse_grid_spec("noise.colour=1,2")
    with pytest.raises(ConfigError):
        parse_grid_spec("noise.kappa")


def test_parameter_sweep():
    config = short(preset_config("fig1a"), t_end=0.5, n_samples=101)
    sweep = ParameterSweep(config, metric="mean_value")
    results = sweep.grid_search({"noise.kappa": [0.0, 0.2]}, n_jobs=1, show_progress=False)
    assert len(results) == 2
    assert results["mean_value"].is_monotonic_decreasing
    assert sweep.get_best_params() == {"noise.kappa": 0.0}
    assert len(sweep.get_top_n(1)) == 1

#!/usr/bin/env python3
"""
Test noise channels, master-equation integration, the expm reference and the
pair-factorized propagation
"""

import math
from types import SimpleNamespace

import numpy as np
import pytest

from dynamics.engine import (
    LindbladEngine,
    StiffnessError,
    TimeGrid,
    evolve,
    rhs,
    tail_population,
)
from dynamics.factorized import PairPropagator, evolve_factorized
from dynamics.noise import CollapseTerm, NoiseRates, collapse_catalog
from dynamics.oracle import OracleDimensionError, expm_oracle, liouvillian, unvec, vec
from entanglement.concurrence import reduce_to_atoms
from models.hamiltonians import TruncationError, build_hamiltonian, build_single_jc
from models.params import InitialStateSpec, ModelParams, StateCase
from models.states import initial_state
from operators.hilbert import (
    ATOM_A,
    CAV_A,
    EXCITED,
    DensityMatrix,
    HilbertSpace,
    LayoutError,
    embed,
    qubit_ops,
)
from operators.validators import ValidationError

NOISY = NoiseRates(kappa_a=0.1, kappa_b=0.1, gamma_a=0.05, gamma_phi_b=0.02, n_th=0.2)


def excited_population(space):
    sigma_plus, sigma_minus, _ = qubit_ops()
    return embed(sigma_plus @ sigma_minus, ATOM_A, space)


def pair_start(cutoff):
    space = HilbertSpace.pair("a", cutoff)
    return space, DensityMatrix.from_ket(space.basis_ket(EXCITED, 0), space)


def test_noise_rates():
    rates = NoiseRates.symmetric(kappa=0.1, n_th=0.5)
    assert rates.for_side("b") == (0.1, 0.0, 0.0)
    assert rates.is_thermal
    assert not rates.is_clean
    assert NoiseRates().is_clean
    assert not NoiseRates(n_th=1.0).is_thermal
    with pytest.raises(ValueError):
        NoiseRates(gamma_a=-0.1)


def test_collapse_catalog_labels_and_rates():
    space = HilbertSpace.double_jc(3)
    terms = collapse_catalog(NoiseRates(kappa_a=0.2, gamma_b=0.1, gamma_phi_a=0.05, n_th=0.5), space)
    by_label = {term.label: term for term in terms}

    assert set(by_label) == {"leak_a", "thermal_a", "decay_b", "dephase_a"}
    assert math.isclose(by_label["leak_a"].rate, 0.3)
    assert math.isclose(by_label["thermal_a"].rate, 0.1)
    assert by_label["decay_b"].site == "atom_b"
    assert np.allclose(by_label["leak_a"].collapse, math.sqrt(0.3) * by_label["leak_a"].operator.data)


def test_collapse_catalog_on_pair_space():
    terms = collapse_catalog(NoiseRates.symmetric(kappa=0.1, gamma=0.1), HilbertSpace.pair("b", 3))
    assert sorted(term.label for term in terms) == ["decay_b", "leak_b"]
    assert collapse_catalog(NoiseRates(), HilbertSpace.double_jc(2)) == []


def test_collapse_term_rejects_negative_rate():
    space = HilbertSpace.pair("a", 2)
    with pytest.raises(ValueError):
        CollapseTerm(excited_population(space), -1.0, ATOM_A)


def test_rhs_preserves_trace_and_hermiticity():
    space = HilbertSpace.double_jc(3)
    h = build_hamiltonian(ModelParams(g_a=0.8), space)
    terms = collapse_catalog(NOISY, space)
    rho = initial_state(InitialStateSpec(case=StateCase.SUDDEN_DEATH), space)

    derivative = rhs(h, terms, rho)
    assert abs(np.trace(derivative)) < 1e-12
    assert np.allclose(derivative, derivative.conj().T)

    with pytest.raises(LayoutError):
        rhs(h, terms, initial_state(InitialStateSpec(), HilbertSpace.double_jc(2)))


def test_derivative_matches_liouvillian():
    space = HilbertSpace.double_jc(2)
    h = build_hamiltonian(ModelParams(g_a=0.8), space)
    terms = collapse_catalog(NOISY, space)
    rho = initial_state(InitialStateSpec(case=StateCase.SUDDEN_DEATH), space)

    engine = LindbladEngine.from_operators(h, terms)
    vectorized = unvec(liouvillian(h, terms) @ vec(rho.data), h.dim)
    assert np.allclose(engine.derivative(rho.data), vectorized, atol=1e-12)

    stack = np.stack([rho.data, np.eye(h.dim) / h.dim])
    assert engine.derivative(stack).shape == stack.shape


def test_time_grid():
    grid = TimeGrid(t_end=2.0, n_samples=5)
    assert np.allclose(grid.scaled_times(), [0.0, 0.5, 1.0, 1.5, 2.0])
    assert np.isclose(grid.times()[-1], 4 * math.pi)
    assert np.isclose(grid.t_max, 4 * math.pi)

    with pytest.raises(ValidationError):
        TimeGrid(t_end=0.0, n_samples=5)
    with pytest.raises(ValidationError):
        TimeGrid(t_end=1.0, n_samples=1)
    with pytest.raises(ValidationError):
        TimeGrid(t_end=1.0, n_samples=5, rtol=0.0)


def test_vacuum_rabi_oscillation():
    space, rho0 = pair_start(3)
    h = build_single_jc(ModelParams(), 3, side="a")
    grid = TimeGrid(t_end=0.5, n_samples=51)

    trajectory = evolve(h, [], rho0, grid, check_truncation=False)
    expected = np.cos(grid.times()) ** 2
    assert np.allclose(trajectory.expect(excited_population(space)), expected, atol=1e-6)
    assert np.allclose(trajectory.purities(), 1.0, atol=1e-6)
    assert trajectory.diagnostics.cutoff == 3
    assert trajectory.diagnostics.rhs_evaluations > 0


def test_free_atomic_decay():
    space, rho0 = pair_start(2)
    h = build_single_jc(ModelParams(g_a=0.0, frame="rotating"), 2, side="a")
    terms = collapse_catalog(NoiseRates(gamma_a=0.3), space)
    grid = TimeGrid(t_end=0.5, n_samples=26)

    trajectory = evolve(h, terms, rho0, grid, check_truncation=False)
    expected = np.exp(-0.3 * grid.times())
    assert np.allclose(trajectory.expect(excited_population(space)), expected, atol=1e-7)


@pytest.mark.parametrize("channel", ["kappa", "gamma"])
def test_damped_rabi_closed_form(channel):
    rate = 0.4
    space, rho0 = pair_start(2)
    h = build_single_jc(ModelParams(frame="rotating"), 2, side="a")
    rates = NoiseRates(kappa_a=rate) if channel == "kappa" else NoiseRates(gamma_a=rate)
    grid = TimeGrid(t_end=1.0, n_samples=101)
    t = grid.times()

    # c_e(t) = exp(-rate t / 4) [cos(W t) +/- rate / (4 W) sin(W t)], W = sqrt(G^2 - rate^2 / 16)
    w = math.sqrt(1.0 - rate ** 2 / 16.0)
    sign = 1.0 if channel == "kappa" else -1.0
    amplitude = np.exp(-rate * t / 4) * (np.cos(w * t) + sign * rate / (4 * w) * np.sin(w * t))

    trajectory = evolve(h, collapse_catalog(rates, space), rho0, grid, check_truncation=False)
    assert np.allclose(trajectory.expect(excited_population(space)), amplitude ** 2, atol=1e-7)


@pytest.mark.parametrize("seed", range(20))
def test_evolve_matches_expm_oracle(seed):
    rng = np.random.default_rng(seed)
    space = HilbertSpace.double_jc(2)
    h = build_hamiltonian(ModelParams(g_a=rng.uniform(0.5, 1.0), frame="rotating"), space)
    rates = NoiseRates(*rng.uniform(0.0, 0.2, size=6), n_th=rng.uniform(0.0, 1.0))
    terms = collapse_catalog(rates, space)
    spec = InitialStateSpec(alpha=rng.uniform(0.0, math.pi / 2), case=list(StateCase)[seed % 2])
    rho0 = initial_state(spec, space)
    grid = TimeGrid(t_end=0.5, n_samples=11)

    trajectory = evolve(h, terms, rho0, grid, check_truncation=False)
    for t, state in zip(grid.times()[1:], trajectory.states[1:]):
        reference = expm_oracle(h, terms, rho0, t)
        assert np.max(np.abs(state.data - reference.data)) <= 1e-6


def test_expm_oracle_at_zero_returns_initial_state():
    space = HilbertSpace.double_jc(2)
    h = build_hamiltonian(ModelParams(), space)
    rho0 = initial_state(InitialStateSpec(case=StateCase.SUDDEN_DEATH), space)
    assert np.allclose(expm_oracle(h, [], rho0, 0.0).data, rho0.data)


def test_oracle_dimension_guard():
    space = HilbertSpace.double_jc(5)
    h = build_hamiltonian(ModelParams(), space)
    with pytest.raises(OracleDimensionError):
        expm_oracle(h, [], initial_state(InitialStateSpec(), space), 1.0)


def test_factorized_matches_full_engine():
    p = ModelParams(g_a=0.8)
    spec = InitialStateSpec(case=StateCase.SUDDEN_DEATH)
    grid = TimeGrid(t_end=0.3, n_samples=31)
    cutoff = 3

    factorized = evolve_factorized(p, NOISY, spec, cutoff, grid, check_truncation=False)

    space = HilbertSpace.double_jc(cutoff)
    h = build_hamiltonian(p, space)
    full = evolve(h, collapse_catalog(NOISY, space), initial_state(spec, space), grid, check_truncation=False)
    reduced = np.array([reduce_to_atoms(rho, space).matrix for rho in full.states])

    assert factorized.atom_states.shape == (31, 4, 4)
    assert np.allclose(factorized.atom_states, reduced, atol=1e-6)
    assert set(factorized.marginals) == {"a", "b"}
    assert factorized.diagnostics.propagator_steps == 2 * 30


def test_pair_propagator_basis():
    propagator = PairPropagator(ModelParams(), NoiseRates(), 3, "b")
    basis = propagator.basis()
    assert basis.shape == (2, 2, 6, 6)
    assert basis[0, 1, 0, 3] == 1.0
    assert np.count_nonzero(basis) == 4


def test_exact_pair_stepper_matches_adaptive_integrator():
    grid = TimeGrid(t_end=2.0, n_samples=201)
    p = ModelParams(g_a=0.9, omega0=2.0, n_photon=2)
    density = np.array([[0.25, 0.4], [0.4, 0.75]])

    stepped = PairPropagator(p, NOISY, 5, "a", exact=True)
    integrated = PairPropagator(p, NOISY, 5, "a", exact=False)
    exact = stepped.evolve(grid, density)
    adaptive = integrated.evolve(grid, density)

    assert stepped.steps == 200 and stepped.rhs_evaluations == 0
    assert integrated.steps == 0 and integrated.rhs_evaluations > 0
    assert exact.atomic.shape == (201, 2, 2, 2, 2)
    assert np.allclose(exact.atomic, adaptive.atomic, atol=1e-6)
    assert np.allclose(exact.marginal, adaptive.marginal, atol=1e-6)
    assert np.allclose(np.trace(exact.marginal, axis1=1, axis2=2), 1.0, atol=1e-12)


def test_long_clean_multiphoton_run_stays_positive():
    # three-photon exchange over scaled time 30 at cutoff 5
    p = ModelParams(omega0=3.0, n_photon=3)
    spec = InitialStateSpec(case=StateCase.NO_SUDDEN_DEATH)
    grid = TimeGrid(t_end=30.0, n_samples=6001)
    trajectory = evolve_factorized(p, NoiseRates(), spec, 5, grid, check_truncation=False)
    assert trajectory.diagnostics.min_eigenvalue > -1e-10
    assert trajectory.diagnostics.max_trace_deviation < 1e-10


def test_tail_check_raises_truncation_error():
    space = HilbertSpace.double_jc(3)
    h = build_hamiltonian(ModelParams(), space)
    terms = collapse_catalog(NoiseRates.symmetric(kappa=0.5, n_th=2.0), space)
    rho0 = initial_state(InitialStateSpec(), space)
    grid = TimeGrid(t_end=0.2, n_samples=11)

    with pytest.raises(TruncationError) as exc:
        evolve(h, terms, rho0, grid)
    assert exc.value.suggested_cutoff == 6
    assert exc.value.max_tail > 1e-6


def test_tail_population_of_vacuum():
    space = HilbertSpace.double_jc(4)
    rho0 = initial_state(InitialStateSpec(), space)
    assert tail_population(rho0.data, space) == 0.0


def test_integrator_failure_raises_stiffness_error(monkeypatch):
    def failing_solver(*args, **kwargs):
        return SimpleNamespace(success=False, t=np.array([0.0, 0.5]), message="Required step size is less than spacing between numbers.")

    monkeypatch.setattr("dynamics.engine.solve_ivp", failing_solver)
    space, rho0 = pair_start(2)
    h = build_single_jc(ModelParams(), 2, side="a")
    with pytest.raises(StiffnessError):
        evolve(h, [], rho0, TimeGrid(t_end=0.1, n_samples=5), check_truncation=False)


def test_trajectory_expect_checks_layout():
    space, rho0 = pair_start(2)
    h = build_single_jc(ModelParams(), 2, side="a")
    trajectory = evolve(h, [], rho0, TimeGrid(t_end=0.1, n_samples=5), check_truncation=False)
    with pytest.raises(LayoutError):
        trajectory.expect(excited_population(HilbertSpace.pair("a", 3)))
    assert CAV_A in trajectory.space.labels

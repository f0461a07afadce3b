"""
Integration tests comparing the dynamics equilibrium against the simplex oracle.
"""

import numpy as np
import pytest

from mcm_dynamics.schemas.bench import GridSpec
from mcm_dynamics.schemas.dynamics import DynamicsConfig, Integrator
from mcm_dynamics.services.bench import run_cv
from mcm_dynamics.services.data import make_synthetic, scale_dataset, split_cv
from mcm_dynamics.services.dynamics import CoupledSystem, initial_state, integrate, step
from mcm_dynamics.services.lp_core import check_kkt, solve_reference
from mcm_dynamics.services.mcm import build_linear_mcm, training_accuracy
from mcm_dynamics.services.stability import recommend_k
from mcm_dynamics.services.training import TrainingService
from tests.conftest import random_lp_corpus


def _adaptive(k: float) -> DynamicsConfig:
    return DynamicsConfig(
        k=k,
        integrator=Integrator.RK45_ADAPTIVE,
        step_size=0.1,
        max_time=1e6,
        convergence_tol=1e-6,
        trace_stride=100,
    )


def _mcm_corpus():
    corpus = []
    for seed in range(5):
        for kind, C in (("separable-blobs", 10.0), ("gaussian-overlap", 1.0)):
            dataset = scale_dataset(make_synthetic(kind, 12, seed=seed), "minmax")
            corpus.append(build_linear_mcm(dataset, C))
    return corpus


def _assert_matches_oracle(lp, result):
    expected = solve_reference(lp).objective_value
    assert result.converged
    assert lp.objective_value(result.state.X) == pytest.approx(expected, rel=1e-3, abs=1e-6)
    assert check_kkt(lp, result.state.X, result.state.Z, tol=1e-4).is_optimal


@pytest.mark.integration
@pytest.mark.slow
class TestOracleEquivalence:
    """Test equilibrium values against exact optima."""

    @pytest.mark.parametrize("index", range(50))
    def test_random_lp(self, index):
        """Test one LP from the seeded random corpus."""
        lp = random_lp_corpus(50, seed=1)[index]
        _assert_matches_oracle(lp, integrate(lp, _adaptive(recommend_k(lp).k)))

    @pytest.mark.parametrize("index", range(10))
    def test_classifier_lp(self, index):
        """Test one classifier LP built from synthetic data."""
        lp = _mcm_corpus()[index]
        _assert_matches_oracle(lp, integrate(lp, _adaptive(recommend_k(lp).k)))

    def test_same_training_predictions(self, six_point_dataset):
        """Test that both backends classify the training set identically."""
        service = TrainingService()
        oracle = service.train(six_point_dataset, C=100.0, backend="oracle")
        dynamics = service.train(six_point_dataset, C=100.0, dynamics_config=_adaptive(1.0), k="auto")
        assert dynamics.converged
        assert training_accuracy(dynamics.model, six_point_dataset) == training_accuracy(oracle.model, six_point_dataset)
        assert dynamics.objective == pytest.approx(oracle.objective, rel=1e-3)


def _fixed_step(k: float, step_size: float) -> DynamicsConfig:
    return DynamicsConfig(
        k=k,
        integrator=Integrator.RK4,
        step_size=step_size,
        max_time=1e4,
        convergence_tol=1e-7,
        trace_stride=10,
    )


def _moving_average(values: np.ndarray, window: int) -> np.ndarray:
    window = max(1, min(window, values.size))
    return np.convolve(values, np.ones(window) / window, mode="valid")


@pytest.mark.integration
class TestDiscretization:
    """Test that the equilibrium does not depend on the step size."""

    @pytest.mark.slow
    @pytest.mark.parametrize("index", range(10))
    def test_halving_the_step(self, index):
        """Test that converged RK4 states agree when the step is halved."""
        lp = random_lp_corpus(10, seed=3)[index]
        k = recommend_k(lp).k
        coarse = integrate(lp, _fixed_step(k, 0.05))
        fine = integrate(lp, _fixed_step(k, 0.025))
        assert coarse.converged and fine.converged
        assert np.max(np.abs(coarse.state.X - fine.state.X)) < 1e-3

    def test_trace_plateaus(self, one_var_lp, fast_config):
        """Test that the tracked value settles at the optimum."""
        trace = integrate(one_var_lp, fast_config).trace
        values = np.asarray(trace.tracked_values["x1"])
        times = np.asarray(trace.times)
        tail = values[times >= 0.75 * times[-1]]
        assert np.max(np.abs(tail - 1.0)) < 1e-3

    @pytest.mark.slow
    @pytest.mark.parametrize(
        "dataset_fixture, C",
        [("separable_dataset", 10.0), ("overlap_dataset", 1.0)],
    )
    def test_classifier_trace_plateaus(self, request, dataset_fixture, C):
        """Test that w, b and h stop moving over the last tenth of a classifier trace."""
        lp = build_linear_mcm(request.getfixturevalue(dataset_fixture), C)
        result = integrate(lp, _fixed_step(recommend_k(lp).k, 0.01))
        assert result.converged
        trace = result.trace
        assert trace.names == ("w1", "w2", "b", "h")
        start = int(0.9 * len(trace))
        for name in trace.names:
            tail = np.asarray(trace.tracked_values[name][start:])
            assert np.ptp(tail) < 1e-4, name
        dx_inf, dz_inf = trace.derivative_inf_norms[-1]
        assert dx_inf < 1e-6
        assert dz_inf < 1e-6


@pytest.mark.integration
@pytest.mark.slow
class TestTraceProperties:
    """Test properties every trajectory on the random corpus must have."""

    @pytest.mark.parametrize("index", range(20))
    def test_late_gap_moving_average_does_not_grow(self, index):
        """Test the duality gap's moving average over the last tenth of the trace."""
        lp = random_lp_corpus(20, seed=2)[index]
        config = _adaptive(recommend_k(lp).k).model_copy(update={"trace_stride": 1})
        result = integrate(lp, config)
        assert result.converged
        gaps = np.asarray(result.trace.duality_gaps)
        tail = gaps[int(0.9 * gaps.size):]
        assert np.all(np.diff(_moving_average(tail, 5)) <= 1e-6)

    @pytest.mark.parametrize("index", range(20))
    def test_every_state_respects_the_sign_constraints(self, index):
        """Test clamped primal and all dual coordinates at every step."""
        lp = random_lp_corpus(20, seed=2)[index]
        config = _adaptive(recommend_k(lp).k)
        system = CoupledSystem(lp, config.k)
        clamped = lp.nonnegative_mask
        state = initial_state(lp, config, system)
        for _ in range(5000):
            assert np.all(state.X[clamped] >= 0.0)
            assert np.all(state.Z >= 0.0)
            if max(state.derivative_norms) < config.convergence_tol or state.t >= config.max_time:
                break
            state = step(lp, state, config, system)

    def test_classifier_slacks_and_margin_stay_nonnegative(self, overlap_dataset):
        """Test h, the slacks and the multipliers along a classifier trajectory."""
        lp = build_linear_mcm(overlap_dataset, 1.0)
        config = _adaptive(recommend_k(lp).k)
        system = CoupledSystem(lp, config.k)
        clamped = lp.nonnegative_mask
        state = initial_state(lp, config, system)
        for _ in range(2000):
            state = step(lp, state, config, system)
            assert np.all(state.X[clamped] >= 0.0)
            assert np.all(state.Z >= 0.0)


@pytest.mark.integration
@pytest.mark.slow
class TestGainChoice:
    """Test the recommended gain against a much smaller one."""

    def test_recommended_gain_beats_a_tenth_of_it(self):
        """Test that k / 10 fails to converge or settles later than k."""
        lp = build_linear_mcm(scale_dataset(make_synthetic("separable-blobs", 12, seed=0), "minmax"), 10.0)
        k = recommend_k(lp).k
        recommended = integrate(lp, _adaptive(k).model_copy(update={"max_time": 1e4}))
        weak = integrate(lp, _adaptive(k / 10.0).model_copy(update={"max_time": 1e4}))
        assert recommended.converged
        assert not weak.converged or weak.state.t > recommended.state.t


@pytest.mark.integration
@pytest.mark.slow
class TestCrossValidationBackends:
    """Test cross-validation through the dynamics against the oracle."""

    def test_fold_by_fold(self):
        """Test per-fold accuracies within one held-out sample of the oracle's."""
        dataset = make_synthetic("gaussian-overlap", 40, seed=5)
        plan = split_cv(dataset, 5, seed=0)
        grid = GridSpec(C_values=(1.0,), k_policy="recommend")
        oracle = run_cv(dataset, None, grid, plan, backend="oracle", jobs=1, scaling="minmax")
        dynamics = run_cv(
            dataset, None, grid, plan, dynamics_config=_adaptive(1.0), backend="dynamics", jobs=1, scaling="minmax"
        )
        assert dynamics.all_converged
        assert not any(dynamics.diverged)
        for size, expected, actual in zip(plan.fold_sizes, oracle.fold_accuracies, dynamics.fold_accuracies):
            assert abs(actual - expected) <= 100.0 / size + 1e-9
        assert abs(dynamics.accuracy_mean - oracle.accuracy_mean) <= 100.0 / min(plan.fold_sizes)

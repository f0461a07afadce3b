"""
Unit tests for training orchestration and cross-validated grid search.
"""

import numpy as np
import pytest

from mcm_dynamics.exceptions import InvalidParameterError, UndefinedResultError
from mcm_dynamics.schemas.bench import GridSpec
from mcm_dynamics.schemas.mcm import Backend, KernelKind, KernelSpec
from mcm_dynamics.services.bench import run_cv, sv_reduction
from mcm_dynamics.services.data import make_synthetic, split_cv
from mcm_dynamics.services.mcm import training_accuracy
from mcm_dynamics.services.stability import recommend_k
from mcm_dynamics.services.training import TrainingService


@pytest.fixture
def service():
    return TrainingService()


@pytest.fixture
def blobs():
    return make_synthetic("separable-blobs", 20, seed=3)


@pytest.mark.unit
class TestTrainingService:
    """Test training through both backends."""

    def test_oracle_backend(self, service, six_point_dataset):
        """Test that the oracle backend fits separable data."""
        outcome = service.train(six_point_dataset, C=100.0, backend="oracle")
        assert outcome.converged
        assert outcome.backend is Backend.ORACLE
        assert outcome.solution is not None
        assert outcome.model.metadata.backend == "oracle"
        assert training_accuracy(outcome.model, six_point_dataset) == 100.0

    def test_fixed_gain_override(self, service, six_point_dataset, euler_config):
        """Test that an explicit gain replaces the configured one."""
        outcome = service.train(six_point_dataset, C=1.0, dynamics_config=euler_config, k=3.5)
        assert outcome.k == 3.5
        assert outcome.integration is not None
        assert outcome.integration.state.t == pytest.approx(euler_config.max_time)

    def test_auto_gain(self, service, six_point_dataset, euler_config):
        """Test that 'auto' uses the recommended gain for the built LP."""
        outcome = service.train(six_point_dataset, C=1.0, dynamics_config=euler_config, k="auto")
        assert outcome.k == pytest.approx(recommend_k(outcome.lp).k)

    def test_kernel_model(self, service, xor_dataset):
        """Test that a kernel spec produces a kernel model."""
        kernel = KernelSpec(kind=KernelKind.RBF, gamma=1.0)
        outcome = service.train(xor_dataset, C=10.0, kernel=kernel, backend=Backend.ORACLE)
        assert outcome.model.kind == "kernel"
        assert outcome.lp.n_vars == 2 * xor_dataset.n_samples + 2

    def test_default_C(self, service, six_point_dataset):
        """Test that C falls back to the configured default."""
        outcome = service.train(six_point_dataset, backend="oracle")
        assert outcome.model.C == service.default_C


@pytest.mark.unit
class TestRunCV:
    """Test grid search with k-fold cross-validation."""

    def test_separable_blobs(self, blobs):
        """Test near-perfect held-out accuracy on well separated blobs."""
        plan = split_cv(blobs, 5, seed=0)
        result = run_cv(blobs, None, GridSpec(C_values=(100.0,)), plan, backend="oracle", jobs=1, scaling="minmax")
        assert result.accuracy_mean >= 90.0
        assert result.all_converged
        assert result.mode == "linear"
        assert len(result.fold_accuracies) == 5

    def test_selected_point_dominates(self, blobs):
        """Test that no grid point beats the selected one."""
        plan = split_cv(blobs, 4, seed=1)
        grid = GridSpec(C_values=(0.01, 1.0, 100.0))
        result = run_cv(blobs, None, grid, plan, backend="oracle", jobs=1)
        best = max(summary.mean_accuracy for summary in result.grid_summary)
        assert result.accuracy_mean == pytest.approx(best)
        ties = [s.C for s in result.grid_summary if s.mean_accuracy == pytest.approx(best)]
        assert result.chosen_C == min(ties)

    def test_statistics_recompute(self, overlap_dataset):
        """Test mean and sample standard deviation against the fold values."""
        plan = split_cv(overlap_dataset, 5, seed=2)
        result = run_cv(overlap_dataset, None, GridSpec(C_values=(1.0,)), plan, backend="oracle", jobs=1)
        accuracies = np.array(result.fold_accuracies, dtype=float)
        assert result.accuracy_mean == pytest.approx(accuracies.mean())
        assert result.accuracy_std == pytest.approx(accuracies.std(ddof=1))
        sv_counts = np.array(result.fold_sv_counts, dtype=float)
        assert result.sv_mean == pytest.approx(sv_counts.mean())

    def test_deterministic(self, overlap_dataset):
        """Test that repeated runs agree apart from wall times."""
        plan = split_cv(overlap_dataset, 3, seed=4)
        runs = [
            run_cv(overlap_dataset, None, GridSpec(C_values=(0.5, 2.0)), plan, backend="oracle", jobs=1)
            for _ in range(2)
        ]
        first, second = (run.model_dump(exclude={"wall_times"}) for run in runs)
        assert first == second

    def test_worker_pool_matches_serial(self, overlap_dataset):
        """Test that parallel folds give the serial result."""
        plan = split_cv(overlap_dataset, 3, seed=4)
        grid = GridSpec(C_values=(1.0,))
        serial = run_cv(overlap_dataset, None, grid, plan, backend="oracle", jobs=1)
        parallel = run_cv(overlap_dataset, None, grid, plan, backend="oracle", jobs=2)
        assert parallel.fold_accuracies == serial.fold_accuracies
        assert parallel.fold_sv_counts == serial.fold_sv_counts

    def test_rbf_grid(self, overlap_dataset):
        """Test that an rbf run selects a gamma from the grid."""
        plan = split_cv(overlap_dataset, 2, seed=0)
        grid = GridSpec(C_values=(1.0,), gamma_values=(0.5, 2.0))
        kernel = KernelSpec(kind=KernelKind.RBF, gamma=1.0)
        result = run_cv(overlap_dataset, kernel, grid, plan, backend="oracle", jobs=1)
        assert result.mode == "rbf"
        assert result.chosen_gamma in (0.5, 2.0)
        assert len(result.grid_summary) == 2

    def test_plan_size_mismatch(self, overlap_dataset, blobs):
        """Test that a plan for another dataset is rejected."""
        plan = split_cv(blobs, 2, seed=0)
        with pytest.raises(InvalidParameterError):
            run_cv(overlap_dataset, None, GridSpec(C_values=(1.0,)), plan, backend="oracle", jobs=1)


@pytest.mark.unit
class TestSVReduction:
    """Test the support-vector reduction metric."""

    def test_fertility(self):
        """Test 9.80 against 38.20."""
        assert round(sv_reduction(9.80, 38.20), 1) == 74.3

    def test_spect(self):
        """Test 49.6 against 50.2."""
        assert round(sv_reduction(49.6, 50.2), 1) == 1.2

    def test_equal(self):
        """Test that equal counts give zero."""
        assert sv_reduction(12.0, 12.0) == 0.0

    def test_zero_baseline(self):
        """Test that a zero baseline is undefined."""
        with pytest.raises(UndefinedResultError):
            sv_reduction(3.0, 0.0)

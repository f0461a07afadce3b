"""
Unit tests for the projected primal-dual dynamics.
"""

import io
import logging

import numpy as np
import pytest

from mcm_dynamics.exceptions import DimensionMismatchError, DivergenceError
from mcm_dynamics.schemas.dynamics import DynamicsConfig, InitMode, Integrator
from mcm_dynamics.schemas.lp import StandardFormLP
from mcm_dynamics.services import dynamics as dynamics_service
from mcm_dynamics.services.dynamics import (
    CoupledSystem,
    derivative,
    export_trace_csv,
    initial_state,
    integrate,
    make_state,
    step,
)
from mcm_dynamics.services.lp_core import solve_reference
from mcm_dynamics.services.mcm import build_linear_mcm


@pytest.mark.unit
class TestDerivative:
    """Test the projected derivative."""

    def test_equilibrium_of_one_variable_lp(self, one_var_lp):
        """Test that (1, 1) is a fixed point."""
        state = make_state(one_var_lp, [1.0], [1.0], k=1.0)
        dX, dZ = derivative(one_var_lp, state, k=1.0)
        np.testing.assert_allclose(dX, [0.0], atol=1e-15)
        np.testing.assert_allclose(dZ, [0.0], atol=1e-15)

    def test_hand_solved_origin(self, one_var_lp):
        """Test the implicit coupling at the origin: dX = 1, dZ = 0."""
        state = make_state(one_var_lp, [0.0], [0.0], k=1.0)
        dX, dZ = derivative(one_var_lp, state, k=1.0)
        np.testing.assert_allclose(dX, [1.0])
        np.testing.assert_allclose(dZ, [0.0], atol=1e-15)
        # Substituting back into both coupled equations
        assert dX[0] == pytest.approx(1.0 - 1.0 * (0.0 + 1.0 * dZ[0]))
        assert dZ[0] == pytest.approx(1.0 * (0.0 + 1.0 * dX[0]) - 1.0)

    def test_held_coordinate_has_zero_derivative(self):
        """Test that a variable at zero pushed outward is held."""
        lp = StandardFormLP(objective=[-1.0], constraint_matrix=[[1.0]], rhs=[1.0])
        state = make_state(lp, [0.0], [0.0], k=1.0)
        assert state.dX[0] == 0.0
        assert state.dZ[0] == 0.0

    def test_oracle_certificate_is_equilibrium(self, lp_corpus):
        """Test that the oracle's primal-dual pair has a vanishing derivative."""
        for lp in lp_corpus:
            primal, dual, _ = solve_reference(lp)
            dX, dZ = CoupledSystem(lp, 3.0).derivative(primal, dual)
            assert max(np.max(np.abs(dX)), np.max(np.abs(dZ))) <= 1e-8

    def test_mcm_certificate_is_equilibrium(self, six_point_dataset):
        """Test the fixed point on a classifier LP with free variables."""
        lp = build_linear_mcm(six_point_dataset, C=1.0)
        primal, dual, _ = solve_reference(lp)
        dX, dZ = CoupledSystem(lp, 2.0).derivative(primal, dual)
        assert max(np.max(np.abs(dX)), np.max(np.abs(dZ))) <= 1e-8

    def test_wrong_state_size(self, one_var_lp, identity_lp):
        """Test that a state of the wrong size is rejected."""
        state = make_state(identity_lp, [0.0, 0.0], [0.0, 0.0], k=1.0)
        with pytest.raises(DimensionMismatchError):
            derivative(one_var_lp, state, k=1.0)

    def test_held_set_settles_in_two_rounds(self):
        """Test a start where the coupling pushes a free-looking coordinate into its bound."""
        lp = StandardFormLP(objective=[0.2], constraint_matrix=[[-1.0]], rhs=[1.0])
        dX, dZ, raw_dX, _ = CoupledSystem(lp, 1.0).resolve(np.array([0.0]), np.array([0.5]))
        assert dX[0] == 0.0
        assert dZ[0] == pytest.approx(-1.0)
        assert raw_dX[0] == pytest.approx(-0.3)

    def test_round_limit_is_logged(self, monkeypatch, caplog):
        """Test the warning when the active set is still changing at the round limit."""
        monkeypatch.setattr(dynamics_service, "MAX_ACTIVE_SET_ROUNDS", 1)
        lp = StandardFormLP(objective=[0.2], constraint_matrix=[[-1.0]], rhs=[1.0])
        with caplog.at_level(logging.WARNING, logger=dynamics_service.__name__):
            CoupledSystem(lp, 1.0).resolve(np.array([0.0]), np.array([0.5]))
        assert "Active-set resolution stopped after 1 rounds" in caplog.text


@pytest.mark.unit
class TestStep:
    """Test single integrator steps."""

    def test_euler_step_from_origin(self, one_var_lp, euler_config):
        """Test X = 0.1, Z = 0 after one Euler step of 0.1."""
        state = initial_state(one_var_lp, euler_config)
        new = step(one_var_lp, state, euler_config)
        np.testing.assert_allclose(new.X, [0.1])
        np.testing.assert_allclose(new.Z, [0.0], atol=1e-15)
        assert new.t == pytest.approx(0.1)

    @pytest.mark.parametrize("integrator", list(Integrator))
    def test_equilibrium_is_preserved(self, one_var_lp, integrator):
        """Test that every integrator leaves the fixed point in place."""
        config = DynamicsConfig(k=1.0, integrator=integrator, step_size=0.1)
        state = make_state(one_var_lp, [1.0], [1.0], k=1.0)
        new = step(one_var_lp, state, config)
        np.testing.assert_allclose(new.X, [1.0], atol=1e-12)
        np.testing.assert_allclose(new.Z, [1.0], atol=1e-12)

    def test_negative_coordinate_is_clamped(self):
        """Test that a sign-constrained coordinate overshooting zero lands exactly on zero."""
        lp = StandardFormLP(objective=[-1.0], constraint_matrix=[[1.0]], rhs=[1.0])
        config = DynamicsConfig(k=1.0, integrator=Integrator.EXPLICIT_EULER, step_size=10.0)
        state = make_state(lp, [0.5], [0.0], k=1.0)
        new = step(lp, state, config)
        assert new.X[0] == 0.0

    def test_make_state_projects(self, one_var_lp):
        """Test that negative inputs are projected before use."""
        state = make_state(one_var_lp, [-2.0], [-1.0], k=1.0)
        assert state.X[0] == 0.0
        assert state.Z[0] == 0.0

    def test_non_finite_state_diverges(self, one_var_lp):
        """Test that a non-finite state raises with the last time."""
        with pytest.raises(DivergenceError):
            make_state(one_var_lp, [np.inf], [0.0], k=1.0)


@pytest.mark.unit
class TestIntegrate:
    """Test integration to equilibrium."""

    def test_one_variable_lp_converges(self, one_var_lp, fast_config):
        """Test that the one-variable LP reaches x = 1."""
        result = integrate(one_var_lp, fast_config)
        assert result.converged
        assert result.state.X[0] == pytest.approx(1.0, abs=1e-4)
        assert result.kkt.is_optimal

    def test_result_unpacks(self, one_var_lp, fast_config):
        """Test the (state, trace, kkt) unpacking."""
        state, trace, kkt = integrate(one_var_lp, fast_config)
        assert trace.times[0] == 0.0
        assert trace.times[-1] == pytest.approx(state.t)
        assert kkt.primal_objective == pytest.approx(1.0, abs=1e-4)

    @pytest.mark.parametrize("integrator", [Integrator.EXPLICIT_EULER, Integrator.RK4])
    def test_fixed_step_integrators_converge(self, identity_lp, integrator):
        """Test the fixed-step schemes on the identity LP."""
        config = DynamicsConfig(k=2.0, integrator=integrator, step_size=0.05, max_time=500.0)
        result = integrate(identity_lp, config)
        assert result.converged
        np.testing.assert_allclose(result.state.X, [1.0, 1.0], atol=1e-4)

    def test_random_initialization_is_seeded(self, identity_lp):
        """Test that random-uniform starts repeat under the same seed."""
        config = DynamicsConfig(k=2.0, init_mode=InitMode.RANDOM_UNIFORM, rng_seed=11)
        first = initial_state(identity_lp, config)
        second = initial_state(identity_lp, config)
        np.testing.assert_array_equal(first.X, second.X)
        assert np.all(first.X >= 0.0)

    def test_time_limit_reports_non_convergence(self, one_var_lp):
        """Test that a short horizon ends unconverged without raising."""
        config = DynamicsConfig(k=1.0, integrator=Integrator.RK4, step_size=0.01, max_time=0.05)
        result = integrate(one_var_lp, config)
        assert not result.converged
        assert result.state.t == pytest.approx(0.05)

    def test_trace_skips_slacks_by_default(self, six_point_dataset):
        """Test that slack components are left out of the default trace."""
        lp = build_linear_mcm(six_point_dataset, C=100.0)
        result = integrate(lp, DynamicsConfig(k=2.0, step_size=0.1, max_time=1.0))
        assert result.trace.names == ("w1", "w2", "b", "h")

    def test_unknown_tracked_component(self, one_var_lp):
        """Test that naming a missing component is rejected."""
        config = DynamicsConfig(tracked_components=("nope",))
        with pytest.raises(DimensionMismatchError):
            integrate(one_var_lp, config)


@pytest.mark.unit
class TestTraceExport:
    """Test the trace CSV."""

    def test_header_and_rows(self, one_var_lp, fast_config):
        """Test the column layout and row count."""
        result = integrate(one_var_lp, fast_config)
        buffer = io.StringIO()
        export_trace_csv(result.trace, buffer)
        lines = buffer.getvalue().splitlines()
        assert lines[0] == "t,x1,dx1,dX_inf,dZ_inf,gap"
        assert len(lines) == len(result.trace) + 1
        final = [float(value) for value in lines[-1].split(",")]
        assert final[3] < fast_config.convergence_tol

    def test_identical_runs_give_identical_files(self, identity_lp, fast_config, tmp_path):
        """Test determinism of the exported trace."""
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for path in paths:
            export_trace_csv(integrate(identity_lp, fast_config).trace, path)
        assert paths[0].read_text() == paths[1].read_text()

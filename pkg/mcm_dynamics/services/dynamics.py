"""
Projected primal-dual dynamics for standard-form LPs.

The state (X, Z) follows the coupled system

    dX = c - G^T (Z + k dZ)
    dZ = G (X + k dX) - p

with c the maximization-sense objective. Sign-constrained coordinates sitting
at zero and pushed outward are held (zero derivative); the coupling is solved
exactly on the remaining moving coordinates.
"""

from functools import lru_cache
from pathlib import Path
from typing import IO, Optional, Tuple, Union
import csv
import logging
import re

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from mcm_dynamics.exceptions import DataIOError, DimensionMismatchError, DivergenceError, InternalInvariantError
from mcm_dynamics.schemas.dynamics import (
    ConvergenceTrace,
    DynamicsConfig,
    DynamicsState,
    InitMode,
    IntegrationResult,
    Integrator,
)
from mcm_dynamics.schemas.lp import StandardFormLP
from mcm_dynamics.services.integrators import explicit_euler_step, rk4_step, rk45_step
from mcm_dynamics.services.lp_core import check_kkt

logger = logging.getLogger(__name__)

MAX_ACTIVE_SET_ROUNDS = 25
SLACK_NAME = re.compile(r"^q\d+$")


class CoupledSystem:
    """Projected derivative of one LP at one gain, with factor reuse."""

    def __init__(self, lp: StandardFormLP, k: float):
        self.lp = lp
        self.k = float(k)
        self.G = lp.constraint_matrix
        self.c = lp.max_objective
        self.p = lp.rhs
        self.n = lp.n_vars
        self.m = lp.m_cons
        self.x_clamped = lp.nonnegative_mask
        self.clamped = np.concatenate([self.x_clamped, np.ones(self.m, dtype=bool)])
        self._factor = lru_cache(maxsize=256)(self._factorize)

    def _factorize(self, moving_x: bytes, moving_z: bytes):
        fx = np.frombuffer(moving_x, dtype=bool)
        fz = np.frombuffer(moving_z, dtype=bool)
        reduced = self.G[np.ix_(fz, fx)]
        system = np.eye(reduced.shape[1]) + self.k ** 2 * (reduced.T @ reduced)
        try:
            return cho_factor(system), reduced
        except LinAlgError as exc:
            raise InternalInvariantError(f"I + k^2 G^T G is not positive definite: {exc}")

    def _solve_moving(self, a: np.ndarray, r: np.ndarray, fx: np.ndarray, fz: np.ndarray):
        dX = np.zeros(self.n)
        dZ = np.zeros(self.m)
        if fx.any():
            factor, reduced = self._factor(fx.tobytes(), fz.tobytes())
            dX[fx] = cho_solve(factor, a[fx] - self.k * (reduced.T @ r[fz]))
            dZ[fz] = r[fz] + self.k * (reduced @ dX[fx])
        else:
            dZ[fz] = r[fz]
        return dX, dZ

    def resolve(self, X: np.ndarray, Z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """
        Projected derivative together with the unprojected one.

        A coordinate at its bound is held while its unprojected derivative,
        computed from the other coordinates' derivatives, is negative.

        Returns:
            (dX, dZ, raw_dX, raw_dZ)
        """
        a = self.c - self.G.T @ Z
        r = self.G @ X - self.p
        at_x = self.x_clamped & (X <= 0.0)
        at_z = Z <= 0.0
        hold_x = at_x & (a < 0.0)
        hold_z = at_z & (r < 0.0)

        for _ in range(MAX_ACTIVE_SET_ROUNDS):
            dX, dZ = self._solve_moving(a, r, ~hold_x, ~hold_z)
            raw_dX = a - self.k * (self.G.T @ dZ)
            raw_dZ = r + self.k * (self.G @ dX)
            next_x = at_x & (raw_dX < 0.0)
            next_z = at_z & (raw_dZ < 0.0)
            if np.array_equal(next_x, hold_x) and np.array_equal(next_z, hold_z):
                break
            hold_x, hold_z = next_x, next_z
        else:
            logger.warning(
                f"Active-set resolution stopped after {MAX_ACTIVE_SET_ROUNDS} rounds; "
                f"{int(hold_x.sum())} primal and {int(hold_z.sum())} dual coordinates held"
            )
        return dX, dZ, raw_dX, raw_dZ

    def derivative(self, X: np.ndarray, Z: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        dX, dZ, _, _ = self.resolve(X, Z)
        return dX, dZ

    def rate(self, y: np.ndarray) -> np.ndarray:
        dX, dZ = self.derivative(y[:self.n], y[self.n:])
        return np.concatenate([dX, dZ])

    def project(self, y: np.ndarray) -> np.ndarray:
        return np.where(self.clamped, np.maximum(y, 0.0), y)

    def state_at(
        self,
        y: np.ndarray,
        t: float,
        previous: Optional[DynamicsState] = None,
        next_step: Optional[float] = None,
    ) -> DynamicsState:
        if not np.all(np.isfinite(y)):
            last_t = previous.t if previous is not None else t
            raise DivergenceError(
                f"State became non-finite after t={last_t:.6g}", last_state=previous, t=last_t
            )
        X, Z = y[:self.n].copy(), y[self.n:].copy()
        dX, dZ = self.derivative(X, Z)
        return DynamicsState(X=X, Z=Z, dX=dX, dZ=dZ, t=t, next_step=next_step)

    def duality_gap(self, state: DynamicsState) -> float:
        return abs(float(self.p @ state.Z - self.c @ state.X))


def _check_state(lp: StandardFormLP, X: np.ndarray, Z: np.ndarray) -> None:
    if X.size != lp.n_vars or Z.size != lp.m_cons:
        raise DimensionMismatchError(
            f"State has {X.size} primal and {Z.size} dual entries, LP needs {lp.n_vars} and {lp.m_cons}"
        )


def derivative(lp: StandardFormLP, state: DynamicsState, k: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Projected derivative (dX, dZ) at ``state``.

    Args:
        lp: The LP
        state: Current point; only X and Z are read
        k: Coupling gain

    Returns:
        (dX, dZ), zero on held coordinates
    """
    X = np.asarray(state.X, dtype=float)
    Z = np.asarray(state.Z, dtype=float)
    _check_state(lp, X, Z)
    return CoupledSystem(lp, k).derivative(X, Z)


def make_state(lp: StandardFormLP, X, Z, k: float, t: float = 0.0) -> DynamicsState:
    """State at (X, Z) with its projected derivative filled in; X and Z are projected first."""
    X = np.asarray(X, dtype=float).ravel()
    Z = np.asarray(Z, dtype=float).ravel()
    _check_state(lp, X, Z)
    system = CoupledSystem(lp, k)
    return system.state_at(system.project(np.concatenate([X, Z])), t)


def initial_state(lp: StandardFormLP, config: DynamicsConfig, system: Optional[CoupledSystem] = None) -> DynamicsState:
    system = system or CoupledSystem(lp, config.k)
    size = lp.n_vars + lp.m_cons
    if config.init_mode is InitMode.RANDOM_UNIFORM:
        rng = np.random.default_rng(config.rng_seed)
        y = rng.uniform(config.init_low, config.init_high, size=size)
    else:
        y = np.zeros(size)
    return system.state_at(system.project(y), 0.0, next_step=config.step_size)


def step(
    lp: StandardFormLP,
    state: DynamicsState,
    config: DynamicsConfig,
    system: Optional[CoupledSystem] = None,
) -> DynamicsState:
    """
    Advance one integrator step with projection onto the sign constraints.

    Args:
        lp: The LP
        state: Current state (sign constraints satisfied)
        config: Integration settings
        system: Reusable coupled system for ``lp`` and ``config.k``

    Returns:
        New state, derivative evaluated at the new point
    """
    system = system or CoupledSystem(lp, config.k)
    _check_state(lp, state.X, state.Z)
    h = config.step_size
    remaining = config.max_time - state.t
    if config.integrator is Integrator.RK45_ADAPTIVE:
        trial = min(state.next_step or h, remaining) if remaining > 0 else (state.next_step or h)
        return rk45_step(system, state, trial, config.rtol, config.atol, config.effective_max_step)
    if 0 < remaining < h:
        h = remaining
    if config.integrator is Integrator.EXPLICIT_EULER:
        return explicit_euler_step(system, state, h)
    return rk4_step(system, state, h)


def _tracked_indices(lp: StandardFormLP, config: DynamicsConfig) -> Tuple[Tuple[str, ...], np.ndarray]:
    names = lp.variable_names
    if config.tracked_components is None:
        chosen = [j for j, name in enumerate(names) if not SLACK_NAME.match(name)]
    else:
        lookup = {name: j for j, name in enumerate(names)}
        missing = [name for name in config.tracked_components if name not in lookup]
        if missing:
            raise DimensionMismatchError(f"Unknown tracked components: {', '.join(missing)}")
        chosen = [lookup[name] for name in config.tracked_components]
    return tuple(names[j] for j in chosen), np.array(chosen, dtype=int)


def _record(trace: ConvergenceTrace, indices: np.ndarray, state: DynamicsState, gap: float) -> None:
    trace.times.append(float(state.t))
    for name, j in zip(trace.names, indices):
        trace.tracked_values[name].append(float(state.X[j]))
        trace.tracked_derivatives[name].append(float(state.dX[j]))
    trace.derivative_inf_norms.append(state.derivative_norms)
    trace.duality_gaps.append(gap)


def _is_converged(lp: StandardFormLP, state: DynamicsState, tol: float) -> bool:
    if max(state.derivative_norms) >= tol:
        return False
    return check_kkt(lp, state.X, state.Z, tol=10.0 * tol).is_optimal


def integrate(lp: StandardFormLP, config: Optional[DynamicsConfig] = None) -> IntegrationResult:
    """
    Integrate the projected dynamics to equilibrium or ``max_time``.

    Convergence means projected derivative norms below ``convergence_tol``
    (held coordinates have a non-positive unprojected derivative by
    construction) and a KKT check passing at ten times that tolerance.
    Running out of time is reported through ``converged=False``.

    Args:
        lp: The LP
        config: Integration settings (defaults from global settings)

    Returns:
        IntegrationResult (unpacks as state, trace, kkt)
    """
    config = config or DynamicsConfig()
    system = CoupledSystem(lp, config.k)
    names, indices = _tracked_indices(lp, config)
    trace = ConvergenceTrace(names=names)

    logger.info(
        f"Integrating LP ({lp.m_cons} constraints, {lp.n_vars} variables) "
        f"with {config.integrator.value}, k={config.k:.6g}"
    )

    state = initial_state(lp, config, system)
    _record(trace, indices, state, system.duality_gap(state))
    n_steps = 0
    converged = _is_converged(lp, state, config.convergence_tol)

    while not converged and state.t < config.max_time:
        state = step(lp, state, config, system)
        n_steps += 1
        converged = _is_converged(lp, state, config.convergence_tol)
        if n_steps % config.trace_stride == 0:
            _record(trace, indices, state, system.duality_gap(state))

    if trace.times[-1] < state.t:
        _record(trace, indices, state, system.duality_gap(state))

    kkt = check_kkt(lp, state.X, state.Z, tol=10.0 * config.convergence_tol)
    if converged:
        logger.info(f"Converged after {n_steps} steps at t={state.t:.6g}, objective {kkt.primal_objective:.10g}")
    else:
        dx_inf, dz_inf = state.derivative_norms
        logger.warning(
            f"No convergence by t={state.t:.6g} after {n_steps} steps "
            f"(|dX|={dx_inf:.3g}, |dZ|={dz_inf:.3g})"
        )
    return IntegrationResult(state=state, trace=trace, kkt=kkt, converged=converged, n_steps=n_steps)


def _trace_header(trace: ConvergenceTrace):
    return ["t", *trace.names, *(f"d{name}" for name in trace.names), "dX_inf", "dZ_inf", "gap"]


def export_trace_csv(trace: ConvergenceTrace, target: Union[str, Path, IO[str]]) -> None:
    """
    Write ``trace`` as CSV, one row per sample, 17 significant digits.

    Args:
        trace: Recorded trace
        target: File path or open text stream
    """
    if isinstance(target, (str, Path)):
        try:
            with open(target, "w", newline="", encoding="utf-8") as handle:
                export_trace_csv(trace, handle)
        except OSError as exc:
            raise DataIOError(f"Cannot write trace to {target}: {exc}")
        return

    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(_trace_header(trace))
    for i, t in enumerate(trace.times):
        dx_inf, dz_inf = trace.derivative_inf_norms[i]
        row = [t]
        row.extend(trace.tracked_values[name][i] for name in trace.names)
        row.extend(trace.tracked_derivatives[name][i] for name in trace.names)
        row.extend([dx_inf, dz_inf, trace.duality_gaps[i]])
        writer.writerow([f"{value:.17g}" for value in row])

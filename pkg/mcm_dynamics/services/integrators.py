"""
Explicit integrators for the projected primal-dual system.

Each step projects every stage state back onto the sign constraints before
evaluating the derivative there, and returns a state that already carries the
derivative at its own point (reused as the first stage of the next step).
"""

from typing import TYPE_CHECKING
import logging

import numpy as np

from mcm_dynamics.exceptions import DivergenceError
from mcm_dynamics.schemas.dynamics import DynamicsState

if TYPE_CHECKING:
    from mcm_dynamics.services.dynamics import CoupledSystem

logger = logging.getLogger(__name__)

# Dormand-Prince 5(4) tableau
DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0
MIN_STEP = 1e-12


def _stacked(state: DynamicsState):
    return np.concatenate([state.X, state.Z]), np.concatenate([state.dX, state.dZ])


def explicit_euler_step(system: "CoupledSystem", state: DynamicsState, h: float) -> DynamicsState:
    y, f = _stacked(state)
    y_new = system.project(y + h * f)
    return system.state_at(y_new, state.t + h, previous=state)


def rk4_step(system: "CoupledSystem", state: DynamicsState, h: float) -> DynamicsState:
    y, k1 = _stacked(state)
    k2 = system.rate(system.project(y + 0.5 * h * k1))
    k3 = system.rate(system.project(y + 0.5 * h * k2))
    k4 = system.rate(system.project(y + h * k3))
    y_new = system.project(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    return system.state_at(y_new, state.t + h, previous=state)


def rk45_step(
    system: "CoupledSystem",
    state: DynamicsState,
    h: float,
    rtol: float,
    atol: float,
    max_step: float,
) -> DynamicsState:
    """
    One accepted Dormand-Prince step, retrying with smaller ``h`` on rejection.

    Args:
        system: Coupled system being integrated
        state: Current state
        h: Trial step
        rtol, atol: Error tolerances (RMS norm over atol + rtol*|y|)
        max_step: Ceiling for the proposed next step

    Returns:
        New state whose ``next_step`` holds the controller's proposal
    """
    y, k1 = _stacked(state)
    h = min(h, max_step)
    while True:
        if h < MIN_STEP:
            raise DivergenceError(
                f"Adaptive step underflow at t={state.t:.6g}", last_state=state, t=state.t
            )
        stages = [k1]
        for row in DP_A[1:]:
            increment = sum(a * k for a, k in zip(row, stages))
            stages.append(system.rate(system.project(y + h * increment)))
        y_new = system.project(y + h * (DP_B @ np.array(stages)))
        if not np.all(np.isfinite(y_new)):
            h *= MIN_FACTOR
            continue
        candidate = system.state_at(y_new, state.t + h, previous=state)
        _, k7 = _stacked(candidate)

        error = h * (DP_E @ np.array(stages + [k7]))
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((error / scale) ** 2))) if error.size else 0.0

        if err <= 1.0:
            factor = MAX_FACTOR if err == 0.0 else min(MAX_FACTOR, max(MIN_FACTOR, SAFETY * err ** -0.2))
            return DynamicsState(
                X=candidate.X,
                Z=candidate.Z,
                dX=candidate.dX,
                dZ=candidate.dZ,
                t=candidate.t,
                next_step=min(h * factor, max_step),
            )
        h *= max(MIN_FACTOR, SAFETY * err ** -0.2)
        logger.debug(f"Rejected step at t={state.t:.6g}, err={err:.3g}, retrying with h={h:.3g}")

"""
LP duality, optimality checking and the reference solve.

Everything is computed in maximization sense internally; values handed back
to callers are converted to the LP's own sense.
"""

from typing import Union
import logging

import numpy as np

from mcm_dynamics.exceptions import DimensionMismatchError, InvalidParameterError
from mcm_dynamics.schemas.lp import (
    ConstraintKind,
    DualLP,
    KKTReport,
    LPSolution,
    Sense,
    StandardFormLP,
    VariableSign,
)
from mcm_dynamics.services.simplex import simplex_solver

logger = logging.getLogger(__name__)


def dualize(lp: Union[StandardFormLP, DualLP]) -> DualLP:
    """
    Dual of a standard-form LP.

    For "max c.x s.t. Gx <= p" the dual is "min p.d s.t. G^T d >= c, d >= 0",
    with equality rows for free primal variables. A minimization primal is
    first negated, and its dual is reported as "max -p.d" so both problems
    share the same optimal value.

    Args:
        lp: Primal LP, or a DualLP (converted to standard form first)

    Returns:
        DualLP
    """
    if isinstance(lp, DualLP):
        lp = lp.as_standard_form()

    row_kinds = tuple(
        ConstraintKind.GE if sign is VariableSign.NONNEGATIVE else ConstraintKind.EQ
        for sign in lp.sign_mask
    )
    if lp.sense is Sense.MAXIMIZE:
        objective, sense = lp.rhs, Sense.MINIMIZE
    else:
        objective, sense = -lp.rhs, Sense.MAXIMIZE

    return DualLP(
        objective=objective,
        constraint_matrix=lp.constraint_matrix.T,
        rhs=lp.max_objective,
        sense=sense,
        row_kinds=row_kinds,
    )


def _as_vector(values, length: int, name: str) -> np.ndarray:
    vector = np.asarray(values, dtype=float).ravel()
    if vector.size != length:
        raise DimensionMismatchError(f"{name} has length {vector.size}, expected {length}")
    return vector


def _positive_max(values: np.ndarray) -> float:
    return float(max(np.max(values), 0.0)) if values.size else 0.0


def check_kkt(
    lp: StandardFormLP,
    primal_point,
    dual_point,
    tol: float = 1e-7,
) -> KKTReport:
    """
    Optimality residuals of a primal/dual pair.

    Args:
        lp: The LP
        primal_point: Candidate primal vector (length n_vars)
        dual_point: Candidate dual vector (length m_cons)
        tol: Tolerance on every violation; the gap test scales it by
            1 + |primal objective|

    Returns:
        KKTReport
    """
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")
    x = _as_vector(primal_point, lp.n_vars, "primal_point")
    d = _as_vector(dual_point, lp.m_cons, "dual_point")

    c = lp.max_objective
    nonneg = lp.nonnegative_mask

    primal_violation = _positive_max(lp.constraint_matrix @ x - lp.rhs)
    sign_violation = max(_positive_max(-x[nonneg]), _positive_max(-d))
    reduced = c - lp.constraint_matrix.T @ d
    dual_violation = max(
        _positive_max(reduced[nonneg]),
        _positive_max(np.abs(reduced[~nonneg])),
    )

    primal_value = float(c @ x)
    dual_value = float(lp.rhs @ d)
    gap = abs(dual_value - primal_value)
    is_optimal = (
        max(primal_violation, sign_violation, dual_violation) <= tol
        and gap <= tol * (1.0 + abs(primal_value))
    )

    return KKTReport(
        primal_feasibility_violation=primal_violation,
        dual_feasibility_violation=dual_violation,
        sign_violation=sign_violation,
        duality_gap=gap,
        primal_objective=lp.to_reported(primal_value),
        dual_objective=lp.to_reported(dual_value),
        tolerance=tol,
        is_optimal=is_optimal,
    )


def solve_reference(lp: StandardFormLP) -> LPSolution:
    """
    Oracle solve by dense simplex.

    On a degenerate optimal face the first vertex reached under Bland's rule
    is returned; compare objective values, not argmin vectors.
    """
    solution = simplex_solver.solve(lp)
    logger.info(
        f"Reference solve: {lp.m_cons} constraints, {lp.n_vars} variables, "
        f"value {solution.objective_value:.10g} after {solution.iterations} pivots"
    )
    return solution


def weak_duality_holds(lp: StandardFormLP, primal_point, dual_point, rel: float = 1e-9) -> bool:
    """Primal value <= dual value (maximization sense) up to ``rel`` relative slack."""
    x = _as_vector(primal_point, lp.n_vars, "primal_point")
    d = _as_vector(dual_point, lp.m_cons, "dual_point")
    primal_value = float(lp.max_objective @ x)
    dual_value = float(lp.rhs @ d)
    return primal_value <= dual_value + rel * (1.0 + max(abs(primal_value), abs(dual_value)))

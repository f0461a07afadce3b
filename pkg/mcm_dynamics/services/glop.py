"""
Independent LP cross-check using Google OR-Tools' GLOP solver.
"""

from typing import Tuple
import logging

import numpy as np
from ortools.linear_solver import pywraplp

from mcm_dynamics.exceptions import InfeasibleError, InternalInvariantError, SolverError, UnboundedError
from mcm_dynamics.schemas.lp import Sense, StandardFormLP

logger = logging.getLogger(__name__)


def solve_glop(lp: StandardFormLP) -> Tuple[np.ndarray, float]:
    """
    Solve ``lp`` with GLOP.

    Args:
        lp: Standard-form LP

    Returns:
        (primal point, objective value in the LP's own sense)
    """
    solver = pywraplp.Solver.CreateSolver("GLOP")
    if solver is None:
        raise InternalInvariantError("OR-Tools GLOP backend is unavailable")

    infinity = solver.infinity()
    variables = [
        solver.NumVar(0.0 if nonneg else -infinity, infinity, name)
        for nonneg, name in zip(lp.nonnegative_mask, lp.variable_names)
    ]

    for i in range(lp.m_cons):
        constraint = solver.Constraint(-infinity, float(lp.rhs[i]))
        for j, coefficient in enumerate(lp.constraint_matrix[i]):
            if coefficient != 0.0:
                constraint.SetCoefficient(variables[j], float(coefficient))

    objective = solver.Objective()
    for j, coefficient in enumerate(lp.objective):
        objective.SetCoefficient(variables[j], float(coefficient))
    if lp.sense is Sense.MAXIMIZE:
        objective.SetMaximization()
    else:
        objective.SetMinimization()

    status = solver.Solve()
    if status == pywraplp.Solver.INFEASIBLE:
        raise InfeasibleError("GLOP reports the LP infeasible")
    if status == pywraplp.Solver.UNBOUNDED:
        raise UnboundedError("GLOP reports the LP unbounded")
    if status != pywraplp.Solver.OPTIMAL:
        raise SolverError(f"GLOP stopped without an optimal solution (status {status})")

    primal = np.array([variable.solution_value() for variable in variables])
    value = float(objective.Value())
    logger.debug(f"GLOP solved {lp.m_cons}x{lp.n_vars} LP, value {value:.10g}")
    return primal, value

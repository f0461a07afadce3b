"""
Dense reference LP solvers.

Two independent mechanisms for small instances: a two-phase tableau simplex
with Bland's rule, and exhaustive vertex enumeration. Both work on the
maximization-sense form of a ``StandardFormLP``.
"""

from itertools import combinations
from math import comb
from typing import List, Optional, Tuple
import logging

import numpy as np

from mcm_dynamics.config import settings
from mcm_dynamics.exceptions import (
    InfeasibleError,
    InternalInvariantError,
    ProblemTooLargeError,
    SolverError,
    UnboundedError,
)
from mcm_dynamics.schemas.lp import LPSolution, StandardFormLP

logger = logging.getLogger(__name__)

PIVOT_EPS = 1e-9
MAX_ENUMERATION_VARS = 12
MAX_ENUMERATION_BASES = 200_000


class _SplitColumns:
    """Column map between an LP and its all-nonnegative split copy."""

    def __init__(self, lp: StandardFormLP):
        self.source: List[Tuple[int, float]] = []
        for j, nonneg in enumerate(lp.nonnegative_mask):
            self.source.append((j, 1.0))
            if not nonneg:
                self.source.append((j, -1.0))
        self.n_original = lp.n_vars
        self.n_split = len(self.source)

    def matrix(self, lp: StandardFormLP) -> np.ndarray:
        columns = [sign * lp.constraint_matrix[:, j] for j, sign in self.source]
        return np.column_stack(columns) if columns else np.zeros((lp.m_cons, 0))

    def objective(self, lp: StandardFormLP) -> np.ndarray:
        c = lp.max_objective
        return np.array([sign * c[j] for j, sign in self.source])

    def recombine(self, split_values: np.ndarray) -> np.ndarray:
        x = np.zeros(self.n_original)
        for value, (j, sign) in zip(split_values, self.source):
            x[j] += sign * value
        return x


class DenseSimplexSolver:
    """Two-phase dense tableau simplex using Bland's anti-cycling rule."""

    def __init__(self, max_iterations: Optional[int] = None):
        self.max_iterations = max_iterations or settings.oracle_max_iterations

    def _pivot(self, tableau: np.ndarray, basis: List[int], row: int, col: int) -> None:
        tableau[row] /= tableau[row, col]
        for i in range(tableau.shape[0]):
            if i != row and tableau[i, col] != 0.0:
                tableau[i] -= tableau[i, col] * tableau[row]
        basis[row] = col

    def _run(
        self,
        tableau: np.ndarray,
        basis: List[int],
        cost: np.ndarray,
        allowed: np.ndarray,
    ) -> Tuple[str, int, Optional[int]]:
        """
        Maximize ``cost`` over the tableau's columns.

        Returns:
            (status, pivots, entering column of an unbounded direction or None)
        """
        pivots = 0
        while True:
            if pivots >= self.max_iterations:
                raise SolverError(f"Simplex exceeded {self.max_iterations} pivots")

            body = tableau[:, :-1]
            reduced = cost - cost[basis] @ body
            candidates = np.flatnonzero((reduced > PIVOT_EPS) & allowed)
            if candidates.size == 0:
                return "optimal", pivots, None
            col = int(candidates[0])

            column = body[:, col]
            best_row = None
            best_ratio = np.inf
            for i in np.flatnonzero(column > PIVOT_EPS):
                ratio = tableau[i, -1] / column[i]
                if ratio < best_ratio - PIVOT_EPS or (
                    abs(ratio - best_ratio) <= PIVOT_EPS and basis[i] < basis[best_row]
                ):
                    best_ratio = ratio
                    best_row = int(i)
            if best_row is None:
                return "unbounded", pivots, col

            self._pivot(tableau, basis, best_row, col)
            pivots += 1

    def solve(self, lp: StandardFormLP) -> LPSolution:
        """
        Solve ``lp`` to optimality.

        Args:
            lp: Standard-form LP, any sense, free variables allowed

        Returns:
            LPSolution with a vertex primal, its complementary dual, and the
            objective value in the LP's own sense

        Raises:
            InfeasibleError: Phase I ends with positive artificial mass
            UnboundedError: an improving column has no blocking row
        """
        split = _SplitColumns(lp)
        m = lp.m_cons
        g_split = split.matrix(lp)
        c_split = split.objective(lp)
        n_struct = split.n_split
        n_cols = n_struct + m

        a_full = np.hstack([g_split, np.eye(m)])
        c_full = np.concatenate([c_split, np.zeros(m)])

        flipped = lp.rhs < 0
        artificial_rows = np.flatnonzero(flipped)
        n_art = artificial_rows.size

        tableau = np.zeros((m, n_cols + n_art + 1))
        signs = np.where(flipped, -1.0, 1.0)
        tableau[:, :n_cols] = signs[:, None] * a_full
        tableau[:, -1] = signs * lp.rhs
        basis = list(range(n_struct, n_struct + m))
        for a, row in enumerate(artificial_rows):
            tableau[row, n_cols + a] = 1.0
            basis[row] = n_cols + a

        total_cols = n_cols + n_art
        pivots = 0

        if n_art:
            phase_one_cost = np.zeros(total_cols)
            phase_one_cost[n_cols:] = -1.0
            _, used, _ = self._run(tableau, basis, phase_one_cost, np.ones(total_cols, dtype=bool))
            pivots += used
            artificial_mass = float(sum(tableau[i, -1] for i, col in enumerate(basis) if col >= n_cols))
            if artificial_mass > 1e-8 * (1.0 + float(np.max(np.abs(lp.rhs)))):
                x = split.recombine(self._basic_values(tableau, basis, n_struct))
                violations = lp.constraint_matrix @ x - lp.rhs
                row = int(np.argmax(violations))
                raise InfeasibleError(
                    f"LP is infeasible; constraint {row + 1} violated by {violations[row]:.6g} "
                    f"at the least-infeasible point",
                    row=row,
                    violation=float(violations[row]),
                )
            for i in range(m):
                if basis[i] < n_cols:
                    continue
                nonzero = np.flatnonzero(np.abs(tableau[i, :n_cols]) > PIVOT_EPS)
                if nonzero.size == 0:
                    raise InternalInvariantError(f"Cannot drive artificial out of row {i}")
                self._pivot(tableau, basis, i, int(nonzero[0]))
                pivots += 1

        phase_two_cost = np.zeros(total_cols)
        phase_two_cost[:n_cols] = c_full
        allowed = np.zeros(total_cols, dtype=bool)
        allowed[:n_cols] = True
        status, used, entering = self._run(tableau, basis, phase_two_cost, allowed)
        pivots += used

        if status == "unbounded":
            direction = np.zeros(n_cols)
            direction[entering] = 1.0
            for i, col in enumerate(basis):
                direction[col] -= tableau[i, entering]
            ray = split.recombine(direction[:n_struct])
            raise UnboundedError("LP is unbounded in the direction of the returned ray", ray=ray)

        basic = np.array(basis)
        b_matrix = a_full[:, basic]
        x_basic = np.linalg.solve(b_matrix, lp.rhs)
        y = np.linalg.solve(b_matrix.T, c_full[basic])

        values = np.zeros(n_cols)
        values[basic] = x_basic
        primal = split.recombine(np.maximum(values[:n_struct], 0.0))
        dual = np.maximum(y, 0.0)
        objective = lp.to_reported(float(lp.max_objective @ primal))

        logger.debug(f"Simplex solved {m}x{lp.n_vars} LP in {pivots} pivots, value {objective:.10g}")
        return LPSolution(primal=primal, dual=dual, objective_value=objective, iterations=pivots)

    @staticmethod
    def _basic_values(tableau: np.ndarray, basis: List[int], n_struct: int) -> np.ndarray:
        values = np.zeros(n_struct)
        for i, col in enumerate(basis):
            if col < n_struct:
                values[col] = tableau[i, -1]
        return values


def enumerate_vertices(lp: StandardFormLP) -> Tuple[np.ndarray, float]:
    """
    Best vertex by exhaustive enumeration of active constraint sets.

    Args:
        lp: LP with at most 12 variables, feasible, bounded and with a vertex

    Returns:
        (primal vertex, objective value in the LP's own sense)
    """
    n = lp.n_vars
    if n > MAX_ENUMERATION_VARS:
        raise ProblemTooLargeError(f"Vertex enumeration limited to {MAX_ENUMERATION_VARS} variables, got {n}")

    nonneg = np.flatnonzero(lp.nonnegative_mask)
    rows = np.vstack([lp.constraint_matrix, -np.eye(n)[nonneg]]) if nonneg.size else lp.constraint_matrix
    rhs = np.concatenate([lp.rhs, np.zeros(nonneg.size)])
    n_candidates = comb(rows.shape[0], n)
    if n_candidates > MAX_ENUMERATION_BASES:
        raise ProblemTooLargeError(f"Vertex enumeration would test {n_candidates} bases")

    slack = 1e-9 * (1.0 + np.abs(rhs))
    objective = lp.max_objective
    best_x = None
    best_value = -np.inf
    for active in combinations(range(rows.shape[0]), n):
        subsystem = rows[list(active)]
        if np.linalg.cond(subsystem) > 1e12:
            continue
        x = np.linalg.solve(subsystem, rhs[list(active)])
        if np.any(rows @ x - rhs > slack):
            continue
        value = float(objective @ x)
        if value > best_value:
            best_value = value
            best_x = x

    if best_x is None:
        raise SolverError("No feasible vertex found")
    return best_x, lp.to_reported(best_value)


simplex_solver = DenseSimplexSolver()

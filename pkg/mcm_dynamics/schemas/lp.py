"""
Linear program Pydantic schemas.

A ``StandardFormLP`` always reads "optimize objective . x subject to
constraint_matrix @ x <= rhs", with per-variable sign restrictions; ``sense``
selects maximization or minimization. Arrays are copied and frozen on
construction so instances can be shared freely.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mcm_dynamics.exceptions import DimensionMismatchError, InvalidInputError


class Sense(str, Enum):
    MAXIMIZE = "maximize"
    MINIMIZE = "minimize"


class VariableSign(str, Enum):
    NONNEGATIVE = "nonnegative"
    FREE = "free"


class ConstraintKind(str, Enum):
    """Direction of a dual constraint row."""

    GE = "ge"
    EQ = "eq"


def _given(value) -> bool:
    return value is not None and len(value) > 0


def _frozen_array(value, ndim: int, name: str) -> np.ndarray:
    try:
        array = np.array(value, dtype=float, copy=True)
    except (TypeError, ValueError) as exc:
        raise InvalidInputError(f"{name} is not numeric: {exc}") from exc
    if ndim == 1:
        array = np.atleast_1d(array)
    if array.ndim != ndim:
        raise DimensionMismatchError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    array.setflags(write=False)
    return array


class StandardFormLP(BaseModel):
    """Standard-form LP with sign metadata."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    sense: Sense = Sense.MAXIMIZE
    sign_mask: tuple[VariableSign, ...] = Field(default=())
    variable_names: tuple[str, ...] = Field(default=())

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data):
        if not isinstance(data, dict):
            return data
        n_vars = int(np.size(data.get("objective", [])))
        data = dict(data)
        if not _given(data.get("sign_mask")):
            data["sign_mask"] = (VariableSign.NONNEGATIVE,) * n_vars
        if not _given(data.get("variable_names")):
            data["variable_names"] = tuple(f"x{j + 1}" for j in range(n_vars))
        return data

    @field_validator("objective", "rhs", mode="before")
    @classmethod
    def _as_vector(cls, value, info):
        return _frozen_array(value, 1, info.field_name)

    @field_validator("constraint_matrix", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        return _frozen_array(value, 2, "constraint_matrix")

    @model_validator(mode="after")
    def _check_shapes(self) -> "StandardFormLP":
        m_cons, n_vars = self.constraint_matrix.shape
        if m_cons != self.rhs.size:
            raise DimensionMismatchError(
                f"constraint_matrix has {m_cons} rows but rhs has length {self.rhs.size}"
            )
        if n_vars != self.objective.size:
            raise DimensionMismatchError(
                f"constraint_matrix has {n_vars} columns but objective has length {self.objective.size}"
            )
        if len(self.sign_mask) != n_vars:
            raise DimensionMismatchError(
                f"sign_mask has length {len(self.sign_mask)}, expected {n_vars}"
            )
        if len(self.variable_names) != n_vars:
            raise DimensionMismatchError(
                f"variable_names has length {len(self.variable_names)}, expected {n_vars}"
            )
        for name, array in (
            ("objective", self.objective),
            ("constraint_matrix", self.constraint_matrix),
            ("rhs", self.rhs),
        ):
            if not np.all(np.isfinite(array)):
                raise InvalidInputError(f"{name} contains non-finite entries")
        return self

    @property
    def n_vars(self) -> int:
        return int(self.objective.size)

    @property
    def m_cons(self) -> int:
        return int(self.rhs.size)

    @property
    def nonnegative_mask(self) -> np.ndarray:
        return np.array([sign is VariableSign.NONNEGATIVE for sign in self.sign_mask], dtype=bool)

    @property
    def max_objective(self) -> np.ndarray:
        """Objective in maximization sense."""
        if self.sense is Sense.MAXIMIZE:
            return self.objective
        return -self.objective

    def objective_value(self, primal: np.ndarray) -> float:
        """Objective value of ``primal`` in this LP's own sense."""
        return float(self.objective @ np.asarray(primal, dtype=float))

    def to_reported(self, max_value: float) -> float:
        """Convert a maximization-sense value back to this LP's sense."""
        return max_value if self.sense is Sense.MAXIMIZE else -max_value


class DualLP(BaseModel):
    """
    Dual of a standard-form LP.

    Reads "optimize objective . d subject to constraint_matrix @ d (>= | =) rhs,
    d >= 0", one row kind per primal variable.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    objective: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    sense: Sense
    row_kinds: tuple[ConstraintKind, ...]

    @field_validator("objective", "rhs", mode="before")
    @classmethod
    def _as_vector(cls, value, info):
        return _frozen_array(value, 1, info.field_name)

    @field_validator("constraint_matrix", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        return _frozen_array(value, 2, "constraint_matrix")

    @model_validator(mode="after")
    def _check_shapes(self) -> "DualLP":
        rows, cols = self.constraint_matrix.shape
        if rows != self.rhs.size or cols != self.objective.size or len(self.row_kinds) != rows:
            raise DimensionMismatchError(
                f"dual shapes disagree: matrix {self.constraint_matrix.shape}, "
                f"rhs {self.rhs.size}, objective {self.objective.size}, row kinds {len(self.row_kinds)}"
            )
        return self

    def as_standard_form(self) -> StandardFormLP:
        """Equivalent ``StandardFormLP``: ge rows negated, eq rows split in two."""
        blocks = [-self.constraint_matrix]
        rhs = [-self.rhs]
        eq_rows = np.array([kind is ConstraintKind.EQ for kind in self.row_kinds], dtype=bool)
        if eq_rows.any():
            blocks.append(self.constraint_matrix[eq_rows])
            rhs.append(self.rhs[eq_rows])
        return StandardFormLP(
            objective=self.objective,
            constraint_matrix=np.vstack(blocks),
            rhs=np.concatenate(rhs),
            sense=self.sense,
            variable_names=tuple(f"d{i + 1}" for i in range(self.objective.size)),
        )


class KKTReport(BaseModel):
    """Optimality residuals of a primal/dual pair."""

    primal_feasibility_violation: float = Field(ge=0)
    dual_feasibility_violation: float = Field(ge=0)
    sign_violation: float = Field(ge=0)
    duality_gap: float = Field(ge=0)
    primal_objective: float
    dual_objective: float
    tolerance: float = Field(gt=0)
    is_optimal: bool


@dataclass(frozen=True)
class LPSolution:
    """Reference solve result; unpacks as (primal, dual, objective_value)."""

    primal: np.ndarray
    dual: np.ndarray
    objective_value: float
    iterations: int = 0

    def __iter__(self) -> Iterator:
        return iter((self.primal, self.dual, self.objective_value))

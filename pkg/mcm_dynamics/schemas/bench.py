"""
Benchmark schemas: hyperparameter grids, fold jobs and run results.
"""

from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, field_validator

from mcm_dynamics import __version__
from mcm_dynamics.config import settings


class GridSpec(BaseModel):
    """Hyperparameter grid; ``gamma_values`` is only read for rbf runs."""

    C_values: Tuple[float, ...] = Field(default_factory=lambda: tuple(settings.grid_C_list), min_length=1)
    gamma_values: Tuple[float, ...] = Field(default_factory=lambda: tuple(settings.grid_gamma_list), min_length=1)
    k_policy: Literal["fixed", "recommend"] = Field(
        default="fixed",
        description="'fixed' uses the dynamics config gain; 'recommend' derives k per fold LP",
    )

    @field_validator("C_values", "gamma_values")
    @classmethod
    def _positive(cls, values):
        if any(value <= 0 for value in values):
            raise ValueError("grid values must be positive")
        return values


@dataclass(frozen=True)
class FoldJob:
    """One (grid point, fold) training run."""

    index: int
    grid_index: int
    C: float
    gamma: Optional[float]
    fold: int
    train_indices: np.ndarray
    test_indices: np.ndarray


@dataclass(frozen=True)
class FoldOutcome:
    index: int
    accuracy: float
    sv_count: int
    converged: bool
    diverged: bool
    wall_time: float


class GridPointSummary(BaseModel):
    C: float
    gamma: Optional[float] = None
    mean_accuracy: float
    n_valid_folds: int


class RunResult(BaseModel):
    """Cross-validation statistics of the selected grid point."""

    dataset_name: str
    n_samples: int
    n_features: int
    dataset_fingerprint: str
    mode: str = Field(description="linear, rbf or polynomial")
    backend: str
    n_folds: int = Field(ge=2)
    stratified: bool = True
    fold_accuracies: List[Optional[float]] = Field(description="Percent; None for a diverged fold")
    fold_sv_counts: List[Optional[int]]
    accuracy_mean: float = Field(ge=0, le=100)
    accuracy_std: float = Field(ge=0)
    sv_mean: float = Field(ge=0)
    sv_std: float = Field(ge=0)
    chosen_C: float
    chosen_gamma: Optional[float] = None
    converged: List[bool]
    diverged: List[bool]
    wall_times: List[float]
    grid_summary: List[GridPointSummary]
    config_fingerprint: str
    tool_version: str = __version__

    @field_validator("fold_accuracies")
    @classmethod
    def _percent(cls, values):
        for value in values:
            if value is not None and not 0.0 <= value <= 100.0:
                raise ValueError(f"accuracy {value} outside [0, 100]")
        return values

    @property
    def all_converged(self) -> bool:
        return all(self.converged)

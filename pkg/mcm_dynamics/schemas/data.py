"""
Dataset and cross-validation plan schemas.
"""

from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from mcm_dynamics.exceptions import DimensionMismatchError, InvalidDatasetError, LabelError


class ScalingKind(str, Enum):
    NONE = "none"
    MINMAX = "minmax"
    STANDARD = "standard"


class ScalingParams(BaseModel):
    """Per-feature affine map x -> (x - offset) / scale."""

    model_config = ConfigDict(frozen=True)

    kind: ScalingKind
    offset: List[float]
    scale: List[float]

    @model_validator(mode="after")
    def _check_lengths(self) -> "ScalingParams":
        if len(self.offset) != len(self.scale):
            raise ValueError("offset and scale must have the same length")
        if any(value <= 0 for value in self.scale):
            raise ValueError("scale entries must be positive")
        return self


class Dataset(BaseModel):
    """
    Feature matrix (M x n) with labels in {-1, +1}.

    ``scaling`` records the transform already applied to ``features`` so new
    points can be mapped identically.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    scaling: Optional[ScalingParams] = None
    feature_names: Tuple[str, ...] = ()
    source: Optional[str] = Field(default=None, description="File the data was read from")

    @field_validator("features", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        try:
            features = np.array(value, dtype=float, copy=True)
        except (TypeError, ValueError) as exc:
            raise InvalidDatasetError(f"features are not numeric: {exc}") from exc
        if features.ndim != 2:
            raise DimensionMismatchError(f"features must be a matrix, got shape {features.shape}")
        if not np.all(np.isfinite(features)):
            raise InvalidDatasetError("features contain NaN or infinite values")
        features.setflags(write=False)
        return features

    @field_validator("labels", mode="before")
    @classmethod
    def _as_labels(cls, value):
        raw = np.asarray(value, dtype=float).ravel()
        if not np.all(np.isin(raw, (-1.0, 1.0))):
            bad = sorted(set(raw[~np.isin(raw, (-1.0, 1.0))].tolist()))[:5]
            raise LabelError(f"labels must be -1 or +1, found {bad}")
        labels = raw.astype(int)
        labels.setflags(write=False)
        return labels

    @model_validator(mode="after")
    def _check_shapes(self) -> "Dataset":
        if self.features.shape[0] != self.labels.size:
            raise DimensionMismatchError(
                f"{self.features.shape[0]} feature rows but {self.labels.size} labels"
            )
        if self.feature_names and len(self.feature_names) != self.features.shape[1]:
            raise DimensionMismatchError(
                f"{len(self.feature_names)} feature names for {self.features.shape[1]} columns"
            )
        if self.scaling is not None and len(self.scaling.offset) != self.features.shape[1]:
            raise DimensionMismatchError("scaling parameters do not match the feature count")
        return self

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def has_both_classes(self) -> bool:
        return bool(np.any(self.labels == 1) and np.any(self.labels == -1))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.n_samples, self.n_features

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=int)
        return Dataset(
            features=self.features[indices],
            labels=self.labels[indices],
            name=self.name,
            scaling=self.scaling,
            feature_names=self.feature_names,
            source=self.source,
        )


class CVPlan(BaseModel):
    """Fold assignment for k-fold cross-validation."""

    model_config = ConfigDict(frozen=True)

    n_folds: int = Field(ge=2)
    seed: int
    fold_assignment: Tuple[int, ...]
    stratified: bool = True

    @model_validator(mode="after")
    def _check_partition(self) -> "CVPlan":
        present = set(self.fold_assignment)
        if present != set(range(self.n_folds)):
            raise ValueError(f"fold_assignment must use every fold 0..{self.n_folds - 1}")
        return self

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.fold_assignment) == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.fold_assignment) != fold)

    @property
    def fold_sizes(self) -> List[int]:
        counts = np.bincount(np.asarray(self.fold_assignment), minlength=self.n_folds)
        return counts.tolist()

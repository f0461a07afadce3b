"""
Classifier schemas: kernel specification, trained models and support sets.
"""

from enum import Enum
from typing import Annotated, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from mcm_dynamics import __version__
from mcm_dynamics.schemas.data import ScalingParams


class Backend(str, Enum):
    """How the classifier LP is solved."""

    DYNAMICS = "dynamics"
    ORACLE = "oracle"


class KernelKind(str, Enum):
    LINEAR = "linear"
    RBF = "rbf"
    POLYNOMIAL = "polynomial"


class KernelSpec(BaseModel):
    """
    Kernel function.

    linear: x.y; rbf: exp(-gamma |x - y|^2); polynomial: (x.y + coef0)^degree.
    """

    model_config = ConfigDict(frozen=True)

    kind: KernelKind
    gamma: Optional[float] = Field(default=None, gt=0)
    degree: Optional[int] = Field(default=None, ge=1)
    coef0: Optional[float] = None

    @model_validator(mode="after")
    def _check_parameters(self) -> "KernelSpec":
        has_gamma = self.gamma is not None
        has_poly = self.degree is not None or self.coef0 is not None
        if self.kind is KernelKind.LINEAR and (has_gamma or has_poly):
            raise ValueError("linear kernel takes no parameters")
        if self.kind is KernelKind.RBF and (not has_gamma or has_poly):
            raise ValueError("rbf kernel needs gamma and nothing else")
        if self.kind is KernelKind.POLYNOMIAL and (
            has_gamma or self.degree is None or self.coef0 is None
        ):
            raise ValueError("polynomial kernel needs degree and coef0")
        return self

    def with_gamma(self, gamma: float) -> "KernelSpec":
        return self.model_copy(update={"gamma": gamma}) if self.kind is KernelKind.RBF else self

    def label(self) -> str:
        if self.kind is KernelKind.RBF:
            return f"rbf(gamma={self.gamma:g})"
        if self.kind is KernelKind.POLYNOMIAL:
            return f"poly(degree={self.degree}, coef0={self.coef0:g})"
        return "linear"


class ModelMetadata(BaseModel):
    """Provenance recorded alongside a trained model."""

    dataset_name: str = ""
    dataset_fingerprint: str = ""
    n_samples: int = Field(default=0, ge=0)
    n_features: int = Field(default=0, ge=0)
    backend: str = "dynamics"
    converged: bool = True
    slack_in_margin_rows: bool = False
    objective: Optional[float] = None
    tool_version: str = __version__


class _ModelBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    b: float
    h: float
    slacks: List[float]
    C: float = Field(gt=0)
    scaling: Optional[ScalingParams] = Field(
        default=None, description="Transform applied to raw features before prediction"
    )
    metadata: ModelMetadata = Field(default_factory=ModelMetadata)

    @property
    def slack_array(self) -> np.ndarray:
        return np.asarray(self.slacks, dtype=float)


class LinearMCMModel(_ModelBase):
    """Hyperplane f(x) = w.x + b."""

    kind: Literal["linear"] = "linear"
    w: List[float]

    @property
    def n_features(self) -> int:
        return len(self.w)


class KernelMCMModel(_ModelBase):
    """Kernel expansion f(x) = sum_j lambda_j K(x, x_j) + b over all training points."""

    kind: Literal["kernel"] = "kernel"
    lambdas: List[float]
    kernel: KernelSpec
    support_points: List[List[float]]
    support_labels: List[int]

    @model_validator(mode="after")
    def _check_lengths(self) -> "KernelMCMModel":
        count = len(self.lambdas)
        if len(self.support_points) != count or len(self.support_labels) != count or len(self.slacks) != count:
            raise ValueError("lambdas, slacks, support_points and support_labels must have equal length")
        return self

    @property
    def n_features(self) -> int:
        return len(self.support_points[0]) if self.support_points else 0


MCMModel = Annotated[Union[LinearMCMModel, KernelMCMModel], Field(discriminator="kind")]


class SupportSet(BaseModel):
    """Training indices (0-based) counted as support vectors."""

    model_config = ConfigDict(frozen=True)

    indices: Tuple[int, ...]
    sv_threshold: float = Field(gt=0)

    @property
    def count(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

"""
Primal-dual dynamics schemas.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from mcm_dynamics.config import settings
from mcm_dynamics.schemas.lp import KKTReport


class Integrator(str, Enum):
    EXPLICIT_EULER = "explicit-euler"
    RK4 = "rk4"
    RK45_ADAPTIVE = "rk45-adaptive"


class InitMode(str, Enum):
    ZEROS = "zeros"
    RANDOM_UNIFORM = "random-uniform"


class DynamicsConfig(BaseModel):
    """Integration settings; defaults come from the global settings."""

    model_config = ConfigDict(frozen=True)

    k: float = Field(default_factory=lambda: settings.gain_k, gt=0, description="Coupling gain")
    step_size: float = Field(default_factory=lambda: settings.step_size, gt=0)
    integrator: Integrator = Field(default_factory=lambda: Integrator(settings.integrator))
    max_time: float = Field(default_factory=lambda: settings.max_time, gt=0)
    convergence_tol: float = Field(default_factory=lambda: settings.convergence_tol, gt=0)
    trace_stride: int = Field(default_factory=lambda: settings.trace_stride, ge=1)
    rng_seed: int = Field(default_factory=lambda: settings.random_seed)
    init_mode: InitMode = InitMode.ZEROS
    init_low: float = Field(default=0.0, description="Lower bound for random-uniform initial values")
    init_high: float = Field(default=1.0, description="Upper bound for random-uniform initial values")
    rtol: float = Field(default_factory=lambda: settings.rtol, gt=0)
    atol: float = Field(default_factory=lambda: settings.atol, gt=0)
    max_step: Optional[float] = Field(
        default=None, gt=0, description="Adaptive step ceiling; defaults to k"
    )
    tracked_components: Optional[Tuple[str, ...]] = Field(
        default=None, description="Variable names recorded in the trace; default skips slacks"
    )

    @model_validator(mode="after")
    def _check_init_bounds(self) -> "DynamicsConfig":
        if self.init_low > self.init_high:
            raise ValueError("init_low must not exceed init_high")
        return self

    @property
    def effective_max_step(self) -> float:
        return self.max_step if self.max_step is not None else self.k


@dataclass(frozen=True)
class DynamicsState:
    """Integrator state; ``dX``/``dZ`` are the projected derivative at (X, Z)."""

    X: np.ndarray
    Z: np.ndarray
    dX: np.ndarray
    dZ: np.ndarray
    t: float
    next_step: Optional[float] = None

    @property
    def derivative_norms(self) -> Tuple[float, float]:
        dx = float(np.max(np.abs(self.dX))) if self.dX.size else 0.0
        dz = float(np.max(np.abs(self.dZ))) if self.dZ.size else 0.0
        return dx, dz


@dataclass
class ConvergenceTrace:
    """Sampled time series of an integration."""

    names: Tuple[str, ...]
    times: List[float] = field(default_factory=list)
    tracked_values: Dict[str, List[float]] = field(default_factory=dict)
    tracked_derivatives: Dict[str, List[float]] = field(default_factory=dict)
    derivative_inf_norms: List[Tuple[float, float]] = field(default_factory=list)
    duality_gaps: List[float] = field(default_factory=list)

    def __post_init__(self):
        for name in self.names:
            self.tracked_values.setdefault(name, [])
            self.tracked_derivatives.setdefault(name, [])

    def __len__(self) -> int:
        return len(self.times)


class StabilityReport(BaseModel):
    """Spectrum of G^T G and the gain condition k^2 lambda_min > 1."""

    lambda_min: float
    lambda_max: float
    k: float = Field(gt=0)
    k_lower_bound: float = Field(description="1/sqrt(lambda_min), infinite when G^T G is singular")
    chosen_k_satisfies: bool
    mass_lambda_min: float = Field(description="Smallest eigenvalue of the mass matrix k^2 G^T G - I")
    method: str = "eigh"

    @property
    def mass_positive_definite(self) -> bool:
        return self.mass_lambda_min > 0.0


class GainRecommendation(BaseModel):
    k: float = Field(gt=0)
    degenerate: bool = Field(description="G^T G numerically singular; k fell back to the default")
    lambda_min: float
    lambda_max: float


@dataclass
class IntegrationResult:
    state: DynamicsState
    trace: ConvergenceTrace
    kkt: KKTReport
    converged: bool
    n_steps: int

    def __iter__(self):
        return iter((self.state, self.trace, self.kkt))

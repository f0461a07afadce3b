"""
Pydantic schemas package.
Import all schemas here for easy access.
"""

# Linear programs
from mcm_dynamics.schemas.lp import (
    Sense,
    VariableSign,
    ConstraintKind,
    StandardFormLP,
    DualLP,
    KKTReport,
    LPSolution,
)

# Dynamics
from mcm_dynamics.schemas.dynamics import (
    Integrator,
    InitMode,
    DynamicsConfig,
    DynamicsState,
    ConvergenceTrace,
    StabilityReport,
    GainRecommendation,
    IntegrationResult,
)

# Data
from mcm_dynamics.schemas.data import (
    ScalingKind,
    ScalingParams,
    Dataset,
    CVPlan,
)

# Classifier
from mcm_dynamics.schemas.mcm import (
    Backend,
    KernelKind,
    KernelSpec,
    ModelMetadata,
    LinearMCMModel,
    KernelMCMModel,
    MCMModel,
    SupportSet,
)

# Benchmark
from mcm_dynamics.schemas.bench import (
    GridSpec,
    FoldJob,
    FoldOutcome,
    GridPointSummary,
    RunResult,
)

__all__ = [
    # Linear programs
    "Sense",
    "VariableSign",
    "ConstraintKind",
    "StandardFormLP",
    "DualLP",
    "KKTReport",
    "LPSolution",
    # Dynamics
    "Integrator",
    "InitMode",
    "DynamicsConfig",
    "DynamicsState",
    "ConvergenceTrace",
    "StabilityReport",
    "GainRecommendation",
    "IntegrationResult",
    # Data
    "ScalingKind",
    "ScalingParams",
    "Dataset",
    "CVPlan",
    # Classifier
    "Backend",
    "KernelKind",
    "KernelSpec",
    "ModelMetadata",
    "LinearMCMModel",
    "KernelMCMModel",
    "MCMModel",
    "SupportSet",
    # Benchmark
    "GridSpec",
    "FoldJob",
    "FoldOutcome",
    "GridPointSummary",
    "RunResult",
]

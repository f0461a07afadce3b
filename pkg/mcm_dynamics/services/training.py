"""
Training orchestration: build the classifier LP, solve it, extract a model.
"""

from dataclasses import dataclass
from typing import Optional, Union
import logging

from mcm_dynamics.config import settings
from mcm_dynamics.schemas.data import Dataset
from mcm_dynamics.schemas.dynamics import DynamicsConfig, IntegrationResult
from mcm_dynamics.schemas.lp import LPSolution, StandardFormLP
from mcm_dynamics.schemas.mcm import Backend, KernelSpec, MCMModel, ModelMetadata
from mcm_dynamics.services.data import fingerprint
from mcm_dynamics.services.dynamics import integrate
from mcm_dynamics.services.lp_core import solve_reference
from mcm_dynamics.services.mcm import (
    build_kernel_mcm,
    build_linear_mcm,
    extract_kernel_model,
    extract_linear_model,
)
from mcm_dynamics.services.stability import recommend_k

logger = logging.getLogger(__name__)


@dataclass
class TrainingOutcome:
    model: MCMModel
    lp: StandardFormLP
    converged: bool
    objective: float
    backend: Backend
    k: Optional[float] = None
    integration: Optional[IntegrationResult] = None
    solution: Optional[LPSolution] = None


class TrainingService:
    """Service for training classifiers through either LP backend."""

    def __init__(self):
        """Initialize training service."""
        self.default_C = settings.default_C

    def build(
        self,
        dataset: Dataset,
        C: float,
        kernel: Optional[KernelSpec] = None,
        slack_in_margin_rows: bool = False,
    ) -> StandardFormLP:
        if kernel is None:
            return build_linear_mcm(dataset, C, slack_in_margin_rows=slack_in_margin_rows)
        return build_kernel_mcm(dataset, C, kernel, slack_in_margin_rows=slack_in_margin_rows)

    def train(
        self,
        dataset: Dataset,
        C: Optional[float] = None,
        kernel: Optional[KernelSpec] = None,
        backend: Union[Backend, str] = Backend.DYNAMICS,
        dynamics_config: Optional[DynamicsConfig] = None,
        k: Union[float, str, None] = None,
        slack_in_margin_rows: bool = False,
    ) -> TrainingOutcome:
        """
        Train a classifier on ``dataset``.

        Args:
            dataset: Training data (already scaled)
            C: Slack weight (defaults to settings.default_C)
            kernel: Kernel specification, or None for the hyperplane model
            backend: "dynamics" integrates to equilibrium; "oracle" uses the simplex
            dynamics_config: Integration settings for the dynamics backend
            k: Gain override; "auto" picks it from the stability condition
            slack_in_margin_rows: Include q in the upper margin rows

        Returns:
            TrainingOutcome with the extracted model
        """
        C = self.default_C if C is None else C
        backend = Backend(backend)
        lp = self.build(dataset, C, kernel, slack_in_margin_rows)

        integration = None
        solution = None
        chosen_k = None
        if backend is Backend.ORACLE:
            solution = solve_reference(lp)
            primal = solution.primal
            converged = True
            objective = solution.objective_value
        else:
            config = dynamics_config or DynamicsConfig()
            if k == "auto":
                config = config.model_copy(update={"k": recommend_k(lp).k})
            elif k is not None:
                config = config.model_copy(update={"k": float(k)})
            chosen_k = config.k
            integration = integrate(lp, config)
            primal = integration.state.X
            converged = integration.converged
            objective = lp.objective_value(primal)

        metadata = ModelMetadata(
            dataset_name=dataset.name,
            dataset_fingerprint=fingerprint(dataset),
            n_samples=dataset.n_samples,
            n_features=dataset.n_features,
            backend=backend.value,
            converged=converged,
            slack_in_margin_rows=slack_in_margin_rows,
            objective=objective,
        )
        if kernel is None:
            model = extract_linear_model(primal, dataset, C, metadata)
        else:
            model = extract_kernel_model(primal, dataset, C, kernel, metadata)

        logger.info(
            f"Trained {model.kind} model on {dataset.name} ({dataset.n_samples} x {dataset.n_features}) "
            f"via {backend.value}: objective {objective:.8g}, h={model.h:.6g}, converged={converged}"
        )
        return TrainingOutcome(
            model=model,
            lp=lp,
            converged=converged,
            objective=objective,
            backend=backend,
            k=chosen_k,
            integration=integration,
            solution=solution,
        )


# Global service instance
training_service = TrainingService()

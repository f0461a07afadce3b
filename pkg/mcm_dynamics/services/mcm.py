"""
Minimal-complexity classifier: LP construction, model extraction, prediction.

Variable layout of the classifier LP is [w (or lambda), b, q, h]:

    minimize    h + C * sum(q)
    subject to  y_i f(x_i) - h <= 0            (upper margin rows)
                -y_i f(x_i) - q_i <= -1        (lower margin rows)
                q >= 0, h >= 0, w and b free
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union
import logging

import numpy as np
from pydantic import TypeAdapter, ValidationError

from mcm_dynamics.config import settings
from mcm_dynamics.exceptions import (
    DataIOError,
    DataParseError,
    DimensionMismatchError,
    InvalidDatasetError,
    InvalidParameterError,
    LayoutMismatchError,
)
from mcm_dynamics.schemas.data import Dataset
from mcm_dynamics.schemas.lp import LPSolution, Sense, StandardFormLP, VariableSign
from mcm_dynamics.schemas.mcm import (
    KernelMCMModel,
    KernelSpec,
    LinearMCMModel,
    MCMModel,
    ModelMetadata,
    SupportSet,
)
from mcm_dynamics.services.kernels import gram_matrix

logger = logging.getLogger(__name__)

_model_adapter = TypeAdapter(MCMModel)


@dataclass(frozen=True)
class MCMLayout:
    """Positions of the weight, bias, slack and margin variables."""

    n_weights: int
    n_samples: int
    kernel: bool = False

    @property
    def size(self) -> int:
        return self.n_weights + self.n_samples + 2

    @property
    def bias(self) -> int:
        return self.n_weights

    @property
    def slacks(self) -> slice:
        return slice(self.n_weights + 1, self.n_weights + 1 + self.n_samples)

    @property
    def margin(self) -> int:
        return self.size - 1

    def names(self) -> Tuple[str, ...]:
        prefix = "l" if self.kernel else "w"
        return (
            *(f"{prefix}{j + 1}" for j in range(self.n_weights)),
            "b",
            *(f"q{i + 1}" for i in range(self.n_samples)),
            "h",
        )

    def sign_mask(self) -> Tuple[VariableSign, ...]:
        free = (VariableSign.FREE,) * (self.n_weights + 1)
        return free + (VariableSign.NONNEGATIVE,) * (self.n_samples + 1)

    def recombine(self, split_vector: np.ndarray) -> np.ndarray:
        """Merge consecutive (+, -) column pairs of the free variables."""
        n_free = self.n_weights + 1
        pairs = split_vector[:2 * n_free].reshape(n_free, 2)
        return np.concatenate([pairs[:, 0] - pairs[:, 1], split_vector[2 * n_free:]])

    def split(self, solution) -> Tuple[np.ndarray, float, np.ndarray, float]:
        """
        Slice a solution vector into (weights, b, q, h).

        Accepts the plain layout or the split-free-variable layout.
        """
        x = np.asarray(solution, dtype=float).ravel()
        if x.size == self.size + self.n_weights + 1:
            x = self.recombine(x)
        if x.size != self.size:
            raise LayoutMismatchError(
                f"Solution has {x.size} entries, classifier layout needs {self.size}"
            )
        return x[:self.n_weights].copy(), float(x[self.bias]), x[self.slacks].copy(), float(x[self.margin])


def _check_training_data(dataset: Dataset, C: float) -> None:
    if C <= 0:
        raise InvalidParameterError(f"C must be positive, got {C}")
    if dataset.n_samples < 2:
        raise InvalidDatasetError(f"Need at least 2 samples, got {dataset.n_samples}")
    if not dataset.has_both_classes:
        raise InvalidDatasetError(f"Dataset '{dataset.name}' contains a single class")


def _assemble(
    signed_block: np.ndarray,
    labels: np.ndarray,
    C: float,
    layout: MCMLayout,
    slack_in_margin_rows: bool,
) -> StandardFormLP:
    M = layout.n_samples
    y = labels.astype(float)[:, None]
    identity = np.eye(M)
    upper_slack = identity if slack_in_margin_rows else np.zeros((M, M))

    upper = np.hstack([signed_block, y, upper_slack, -np.ones((M, 1))])
    lower = np.hstack([-signed_block, -y, -identity, np.zeros((M, 1))])
    objective = np.concatenate([np.zeros(layout.n_weights + 1), np.full(M, C), [1.0]])

    return StandardFormLP(
        objective=objective,
        constraint_matrix=np.vstack([upper, lower]),
        rhs=np.concatenate([np.zeros(M), -np.ones(M)]),
        sense=Sense.MINIMIZE,
        sign_mask=layout.sign_mask(),
        variable_names=layout.names(),
    )


def build_linear_mcm(dataset: Dataset, C: float, slack_in_margin_rows: bool = False) -> StandardFormLP:
    """
    Classifier LP for a hyperplane in feature space.

    Args:
        dataset: Training data with labels in {-1, +1} and both classes present
        C: Slack weight
        slack_in_margin_rows: Also subtract q_i in the upper margin rows

    Returns:
        Minimization LP with n + M + 2 columns and 2M rows
    """
    _check_training_data(dataset, C)
    layout = MCMLayout(n_weights=dataset.n_features, n_samples=dataset.n_samples)
    signed = dataset.labels[:, None] * dataset.features
    return _assemble(signed, dataset.labels, C, layout, slack_in_margin_rows)


def build_kernel_mcm(
    dataset: Dataset,
    C: float,
    kernel: KernelSpec,
    slack_in_margin_rows: bool = False,
) -> StandardFormLP:
    """Classifier LP with the Gram matrix in place of the feature matrix."""
    _check_training_data(dataset, C)
    layout = MCMLayout(n_weights=dataset.n_samples, n_samples=dataset.n_samples, kernel=True)
    signed = dataset.labels[:, None] * gram_matrix(dataset.features, None, kernel)
    return _assemble(signed, dataset.labels, C, layout, slack_in_margin_rows)


def _primal(solution: Union[LPSolution, np.ndarray]) -> np.ndarray:
    return solution.primal if isinstance(solution, LPSolution) else np.asarray(solution, dtype=float)


def extract_linear_model(
    solution: Union[LPSolution, np.ndarray],
    dataset: Dataset,
    C: float,
    metadata: Optional[ModelMetadata] = None,
) -> LinearMCMModel:
    layout = MCMLayout(n_weights=dataset.n_features, n_samples=dataset.n_samples)
    w, b, q, h = layout.split(_primal(solution))
    return LinearMCMModel(
        w=w.tolist(),
        b=b,
        h=h,
        slacks=q.tolist(),
        C=C,
        scaling=dataset.scaling,
        metadata=metadata or ModelMetadata(n_samples=dataset.n_samples, n_features=dataset.n_features),
    )


def extract_kernel_model(
    solution: Union[LPSolution, np.ndarray],
    dataset: Dataset,
    C: float,
    kernel: KernelSpec,
    metadata: Optional[ModelMetadata] = None,
) -> KernelMCMModel:
    layout = MCMLayout(n_weights=dataset.n_samples, n_samples=dataset.n_samples, kernel=True)
    lambdas, b, q, h = layout.split(_primal(solution))
    return KernelMCMModel(
        lambdas=lambdas.tolist(),
        b=b,
        h=h,
        slacks=q.tolist(),
        C=C,
        kernel=kernel,
        support_points=dataset.features.tolist(),
        support_labels=dataset.labels.tolist(),
        scaling=dataset.scaling,
        metadata=metadata or ModelMetadata(n_samples=dataset.n_samples, n_features=dataset.n_features),
    )


def decision_function(model: MCMModel, X) -> np.ndarray:
    """
    Raw scores f(x) for each row of ``X``.

    Features must already be in the model's (scaled) space.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise DimensionMismatchError(
            f"Model expects {model.n_features} features, got {X.shape[1]}"
        )
    if isinstance(model, LinearMCMModel):
        return X @ np.asarray(model.w) + model.b
    K = gram_matrix(X, np.asarray(model.support_points), model.kernel)
    return K @ np.asarray(model.lambdas) + model.b


def predict_batch(model: MCMModel, X) -> Tuple[np.ndarray, np.ndarray]:
    """Labels (ties at f = 0 go to +1) and raw scores for each row of ``X``."""
    scores = decision_function(model, X)
    return np.where(scores >= 0.0, 1, -1), scores


def predict(model: MCMModel, x) -> Tuple[int, float]:
    """
    Label and raw score of one point.

    Args:
        model: Trained classifier
        x: Feature vector in the model's space

    Returns:
        (label in {-1, +1}, f(x))
    """
    x = np.asarray(x, dtype=float).ravel()
    labels, scores = predict_batch(model, x[None, :])
    return int(labels[0]), float(scores[0])


def training_accuracy(model: MCMModel, dataset: Dataset) -> float:
    """Percent of ``dataset`` rows classified correctly."""
    labels, _ = predict_batch(model, dataset.features)
    return 100.0 * float(np.mean(labels == dataset.labels))


def support_vectors(model: MCMModel, tol: Optional[float] = None, dataset: Optional[Dataset] = None) -> SupportSet:
    """
    Support set of a trained model.

    Kernel models count coefficients with |lambda_j| > tol * max|lambda|.
    Linear models count training points whose upper or lower margin
    constraint is active within ``tol * max(1, |h|)``; they need the
    training ``dataset``.
    """
    tol = settings.sv_tolerance if tol is None else tol
    if tol <= 0:
        raise InvalidParameterError(f"tol must be positive, got {tol}")

    if isinstance(model, KernelMCMModel):
        magnitudes = np.abs(np.asarray(model.lambdas))
        largest = float(magnitudes.max()) if magnitudes.size else 0.0
        indices = np.flatnonzero(magnitudes > tol * largest) if largest > 0.0 else np.array([], dtype=int)
        return SupportSet(indices=tuple(int(i) for i in indices), sv_threshold=tol)

    if dataset is None:
        raise InvalidParameterError("Linear support vectors need the training dataset")
    if dataset.n_samples != len(model.slacks):
        raise DimensionMismatchError(
            f"Model was trained on {len(model.slacks)} samples, dataset has {dataset.n_samples}"
        )
    margins = dataset.labels * decision_function(model, dataset.features)
    q = model.slack_array
    upper = model.h - margins - (q if model.metadata.slack_in_margin_rows else 0.0)
    lower = margins + q - 1.0
    band = tol * max(1.0, abs(model.h))
    active = (np.abs(upper) <= band) | (np.abs(lower) <= band)
    return SupportSet(indices=tuple(int(i) for i in np.flatnonzero(active)), sv_threshold=tol)


def save_model(model: MCMModel, path: Union[str, Path]) -> None:
    try:
        Path(path).write_text(model.model_dump_json(indent=2), encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"Cannot write model to {path}: {exc}")
    logger.info(f"Saved {model.kind} model to {path}")


def load_model(path: Union[str, Path]) -> MCMModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"Cannot read model file {path}: {exc}")
    try:
        return _model_adapter.validate_json(text)
    except ValidationError as exc:
        raise DataParseError(f"Model file {path} is not a valid classifier: {exc.errors()[0]['msg']}")

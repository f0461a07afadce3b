"""
Cross-validated grid search over classifier hyperparameters.
"""

from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Dict, List, Optional, Tuple, Union
import hashlib
import json
import logging
import time

import numpy as np

from mcm_dynamics.config import settings
from mcm_dynamics.exceptions import DivergenceError, InvalidParameterError, UndefinedResultError
from mcm_dynamics.schemas.bench import FoldJob, FoldOutcome, GridPointSummary, GridSpec, RunResult
from mcm_dynamics.schemas.data import CVPlan, Dataset, ScalingKind
from mcm_dynamics.schemas.dynamics import DynamicsConfig
from mcm_dynamics.schemas.mcm import Backend, KernelKind, KernelSpec
from mcm_dynamics.services.data import apply_scaling, fingerprint, fit_scaling, scale_dataset
from mcm_dynamics.services.mcm import predict_batch, support_vectors
from mcm_dynamics.services.training import training_service

logger = logging.getLogger(__name__)


def _grid_points(grid: GridSpec, kernel: Optional[KernelSpec]) -> List[Tuple[float, Optional[float]]]:
    C_values = sorted(set(grid.C_values))
    if kernel is not None and kernel.kind is KernelKind.RBF:
        return [(C, gamma) for C in C_values for gamma in sorted(set(grid.gamma_values))]
    return [(C, None) for C in C_values]


def _mode(kernel: Optional[KernelSpec]) -> str:
    if kernel is None:
        return "linear"
    return "kernel-linear" if kernel.kind is KernelKind.LINEAR else kernel.kind.value


def _run_fold(
    job: FoldJob,
    dataset: Dataset,
    kernel: Optional[KernelSpec],
    backend: Backend,
    dynamics_config: DynamicsConfig,
    scaling: ScalingKind,
    k_policy: str,
    slack_in_margin_rows: bool,
) -> FoldOutcome:
    started = time.perf_counter()
    raw_train = dataset.subset(job.train_indices)
    test = dataset.subset(job.test_indices)
    train = scale_dataset(raw_train, scaling)
    test_features = apply_scaling(fit_scaling(raw_train, scaling), test.features)

    fold_kernel = kernel.with_gamma(job.gamma) if kernel is not None and job.gamma is not None else kernel
    try:
        outcome = training_service.train(
            train,
            C=job.C,
            kernel=fold_kernel,
            backend=backend,
            dynamics_config=dynamics_config,
            k="auto" if k_policy == "recommend" else None,
            slack_in_margin_rows=slack_in_margin_rows,
        )
    except DivergenceError as exc:
        logger.warning(f"Fold {job.fold} at C={job.C:g} diverged: {exc.detail}")
        return FoldOutcome(
            index=job.index,
            accuracy=float("nan"),
            sv_count=0,
            converged=False,
            diverged=True,
            wall_time=time.perf_counter() - started,
        )

    predicted, _ = predict_batch(outcome.model, test_features)
    accuracy = 100.0 * float(np.mean(predicted == test.labels))
    sv_count = support_vectors(outcome.model, dataset=train).count
    return FoldOutcome(
        index=job.index,
        accuracy=accuracy,
        sv_count=sv_count,
        converged=outcome.converged,
        diverged=False,
        wall_time=time.perf_counter() - started,
    )


def _sample_std(values: List[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def _config_fingerprint(payload: Dict) -> str:
    encoded = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(encoded).hexdigest()


def run_cv(
    dataset: Dataset,
    kernel: Optional[KernelSpec],
    grid: GridSpec,
    cv_plan: CVPlan,
    dynamics_config: Optional[DynamicsConfig] = None,
    backend: Union[Backend, str] = Backend.DYNAMICS,
    jobs: Optional[int] = None,
    scaling: Union[ScalingKind, str, None] = None,
    slack_in_margin_rows: bool = False,
) -> RunResult:
    """
    Grid search with k-fold cross-validation.

    Every (grid point, fold) pair trains on the fold's complement and is
    scored on the held-out fold. Scaling is fitted on each training part.
    The grid point with the highest mean accuracy wins; ties go to the
    smaller C, then the smaller gamma. Diverged folds are excluded from the
    statistics; non-converged folds are kept and flagged.

    Args:
        dataset: Unscaled dataset
        kernel: None for the hyperplane model, else the kernel (rbf gamma
            comes from the grid)
        grid: Hyperparameter grid
        cv_plan: Fold assignment for ``dataset``
        dynamics_config: Integration settings for the dynamics backend
        backend: "dynamics" or "oracle"
        jobs: Worker processes (default settings.jobs)
        scaling: Feature scaling fitted per fold (default settings.scaling)
        slack_in_margin_rows: Include q in the upper margin rows

    Returns:
        RunResult for the selected grid point
    """
    if len(cv_plan.fold_assignment) != dataset.n_samples:
        raise InvalidParameterError("CV plan does not match the dataset size")
    backend = Backend(backend)
    config = dynamics_config or DynamicsConfig()
    jobs = settings.jobs if jobs is None else jobs
    scaling = ScalingKind(scaling or settings.scaling)
    points = _grid_points(grid, kernel)

    fold_jobs = []
    for grid_index, (C, gamma) in enumerate(points):
        for fold in range(cv_plan.n_folds):
            fold_jobs.append(FoldJob(
                index=len(fold_jobs),
                grid_index=grid_index,
                C=C,
                gamma=gamma,
                fold=fold,
                train_indices=cv_plan.train_indices(fold),
                test_indices=cv_plan.test_indices(fold),
            ))

    logger.info(
        f"Cross-validating {dataset.name}: {len(points)} grid points x {cv_plan.n_folds} folds, "
        f"backend={backend.value}, jobs={jobs}"
    )
    worker = partial(
        _run_fold,
        dataset=dataset,
        kernel=kernel,
        backend=backend,
        dynamics_config=config,
        scaling=scaling,
        k_policy=grid.k_policy,
        slack_in_margin_rows=slack_in_margin_rows,
    )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            outcomes = list(executor.map(worker, fold_jobs))
    else:
        outcomes = [worker(job) for job in fold_jobs]
    outcomes.sort(key=lambda outcome: outcome.index)

    summaries = []
    by_point: List[List[FoldOutcome]] = []
    for grid_index, (C, gamma) in enumerate(points):
        point_outcomes = [o for o, job in zip(outcomes, fold_jobs) if job.grid_index == grid_index]
        by_point.append(point_outcomes)
        valid = [o.accuracy for o in point_outcomes if not o.diverged]
        mean = float(np.mean(valid)) if valid else float("-inf")
        summaries.append(GridPointSummary(C=C, gamma=gamma, mean_accuracy=mean, n_valid_folds=len(valid)))
        if valid:
            logger.info(f"{dataset.name} C={C:g} gamma={gamma}: mean accuracy {mean:.2f}%")

    if all(summary.n_valid_folds == 0 for summary in summaries):
        raise DivergenceError(f"Every fold diverged on {dataset.name}")

    best = min(
        range(len(points)),
        key=lambda i: (-summaries[i].mean_accuracy, points[i][0], points[i][1] or 0.0),
    )
    chosen = by_point[best]
    valid = [o for o in chosen if not o.diverged]
    accuracies = [o.accuracy for o in valid]
    sv_counts = [float(o.sv_count) for o in valid]

    fingerprint_payload = {
        "grid": grid.model_dump(mode="json"),
        "dynamics": config.model_dump(mode="json"),
        "kernel": kernel.model_dump(mode="json") if kernel is not None else None,
        "backend": backend.value,
        "scaling": scaling.value,
        "n_folds": cv_plan.n_folds,
        "seed": cv_plan.seed,
        "slack_in_margin_rows": slack_in_margin_rows,
    }
    result = RunResult(
        dataset_name=dataset.name,
        n_samples=dataset.n_samples,
        n_features=dataset.n_features,
        dataset_fingerprint=fingerprint(dataset),
        mode=_mode(kernel),
        backend=backend.value,
        n_folds=cv_plan.n_folds,
        stratified=cv_plan.stratified,
        fold_accuracies=[None if o.diverged else o.accuracy for o in chosen],
        fold_sv_counts=[None if o.diverged else o.sv_count for o in chosen],
        accuracy_mean=float(np.mean(accuracies)),
        accuracy_std=_sample_std(accuracies),
        sv_mean=float(np.mean(sv_counts)),
        sv_std=_sample_std(sv_counts),
        chosen_C=points[best][0],
        chosen_gamma=points[best][1],
        converged=[o.converged for o in chosen],
        diverged=[o.diverged for o in chosen],
        wall_times=[o.wall_time for o in chosen],
        grid_summary=[s for s in summaries if s.n_valid_folds > 0],
        config_fingerprint=_config_fingerprint(fingerprint_payload),
    )
    if not result.all_converged:
        logger.warning(f"{dataset.name}: some folds did not converge at the selected grid point")
    return result


def _mean_sv(value: Union[RunResult, float]) -> float:
    return value.sv_mean if isinstance(value, RunResult) else float(value)


def sv_reduction(candidate: Union[RunResult, float], baseline: Union[RunResult, float]) -> float:
    """
    Percent fewer support vectors of ``candidate`` relative to ``baseline``.

    Args:
        candidate: RunResult or mean support-vector count
        baseline: RunResult or mean support-vector count

    Returns:
        100 * (baseline - candidate) / baseline
    """
    candidate_mean = _mean_sv(candidate)
    baseline_mean = _mean_sv(baseline)
    if baseline_mean == 0.0:
        raise UndefinedResultError("Baseline has zero mean support vectors")
    return 100.0 * (baseline_mean - candidate_mean) / baseline_mean

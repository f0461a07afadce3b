"""
``cv``: cross-validated grid search and benchmark report.
"""

from pathlib import Path
import logging

from mcm_dynamics.commands.common import (
    add_shared_flags,
    dynamics_config,
    emit,
    kernel_spec,
    load_dataset,
    log_slow_defaults_hint,
    scaling_kind,
)
from mcm_dynamics.config import settings
from mcm_dynamics.exceptions import NON_CONVERGENCE_EXIT_CODE, InvalidParameterError
from mcm_dynamics.schemas.bench import GridSpec
from mcm_dynamics.services.bench import run_cv
from mcm_dynamics.services.data import UCI_DATASETS, load_uci, split_cv
from mcm_dynamics.services.reports import emit_report

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("cv", help="Cross-validate over a hyperparameter grid")
    add_shared_flags(parser)
    parser.add_argument(
        "--uci",
        metavar="KEYS",
        help=f"Comma-separated benchmark keys or 'all' ({', '.join(UCI_DATASETS)})",
    )
    parser.add_argument("--uci-dir", metavar="PATH", help="Directory holding the benchmark files")
    parser.set_defaults(handler=handle)


def _datasets(args):
    if args.uci:
        directory = args.uci_dir or settings.uci_data_dir
        if not directory:
            raise InvalidParameterError("--uci needs --uci-dir or MCM_UCI_DATA_DIR")
        keys = list(UCI_DATASETS) if args.uci == "all" else [key.strip() for key in args.uci.split(",")]
        datasets = [load_uci(key, Path(directory)) for key in keys]
        if args.data:
            datasets.append(load_dataset(args))
        return datasets
    return [load_dataset(args)]


def _grid(args, k) -> GridSpec:
    values = {"k_policy": "recommend" if k == "auto" else "fixed"}
    if args.C is not None:
        values["C_values"] = (args.C,)
    if args.gamma is not None:
        values["gamma_values"] = (args.gamma,)
    return GridSpec(**values)


def handle(args) -> int:
    config, k = dynamics_config(args)
    log_slow_defaults_hint(args, k)
    grid = _grid(args, k)
    folds = args.folds if args.folds is not None else settings.cv_folds
    seed = args.seed if args.seed is not None else settings.random_seed

    results = []
    for dataset in _datasets(args):
        # rbf widths come from the grid, so no per-dataset gamma default here
        kernel = kernel_spec(args)
        plan = split_cv(dataset, folds, seed)
        results.append(run_cv(
            dataset,
            kernel,
            grid,
            plan,
            dynamics_config=config,
            backend=args.backend,
            jobs=args.jobs,
            scaling=scaling_kind(args),
        ))
    emit(emit_report(results, args.format), args.out)

    if not all(result.all_converged for result in results):
        logger.warning("Some folds did not converge; see the converged column")
        return NON_CONVERGENCE_EXIT_CODE
    return 0

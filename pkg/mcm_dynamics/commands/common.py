"""
Flags and helpers shared by every sub-command.
"""

from argparse import ArgumentParser, ArgumentTypeError
from pathlib import Path
from typing import Optional, Tuple, Union
import logging
import sys

from mcm_dynamics.config import settings
from mcm_dynamics.exceptions import DataIOError, InvalidParameterError
from mcm_dynamics.schemas.data import Dataset
from mcm_dynamics.schemas.dynamics import DynamicsConfig, Integrator
from mcm_dynamics.schemas.mcm import KernelKind, KernelSpec
from mcm_dynamics.services.data import load_csv, load_sparse

logger = logging.getLogger(__name__)

SHARED_FLAGS = (
    "--data",
    "--label-col",
    "--positive",
    "--kernel",
    "--gamma",
    "--C",
    "--k",
    "--step",
    "--tol",
    "--max-time",
    "--integrator",
    "--backend",
    "--seed",
    "--folds",
    "--jobs",
    "--out",
    "--format",
)

INTEGRATOR_FLAGS = {
    "euler": Integrator.EXPLICIT_EULER,
    "rk4": Integrator.RK4,
    "rk45": Integrator.RK45_ADAPTIVE,
}

SPARSE_SUFFIXES = {".svm", ".svmlight", ".libsvm"}

DEFAULT_POLY_DEGREE = 3
DEFAULT_POLY_COEF0 = 1.0

SLOW_DEFAULTS_HINT = (
    "A fixed gain with fixed-step rk4 at the default step can need 1e5+ steps to settle; "
    "--k auto --integrator rk45 usually converges in a few hundred"
)


def gain(value: str) -> Union[float, str]:
    """argparse type for ``--k``: a positive number or ``auto``."""
    if value == "auto":
        return value
    try:
        k = float(value)
    except ValueError:
        raise ArgumentTypeError(f"expected a positive number or 'auto', got '{value}'")
    if k <= 0:
        raise ArgumentTypeError(f"k must be positive, got {value}")
    return k


def add_shared_flags(parser: ArgumentParser) -> None:
    group = parser.add_argument_group("shared options")
    group.add_argument("--data", metavar="PATH", help="Input file (dataset, features or LP)")
    group.add_argument("--label-col", metavar="NAME", help="Label column name or index (default: last)")
    group.add_argument("--positive", metavar="LABEL", help="Label value mapped to +1 (default: 1)")
    group.add_argument("--kernel", choices=("linear", "rbf", "poly"), default="linear", help="Kernel")
    group.add_argument("--gamma", type=float, metavar="F", help="RBF width")
    group.add_argument("--C", dest="C", type=float, metavar="F", help="Slack weight")
    group.add_argument(
        "--k",
        type=gain,
        metavar="F|auto",
        help="Coupling gain, or 'auto' for the stability-derived gain (recommended; the default fixed gain is slow)",
    )
    group.add_argument("--step", type=float, metavar="F", help="Integration step size")
    group.add_argument("--tol", type=float, metavar="F", help="Convergence tolerance")
    group.add_argument("--max-time", type=float, metavar="F", help="Integration horizon")
    group.add_argument(
        "--integrator",
        choices=tuple(INTEGRATOR_FLAGS),
        help="Integration scheme (default rk4; rk45 adapts its step and is much faster to settle)",
    )
    group.add_argument("--backend", choices=("dynamics", "oracle"), default="dynamics", help="LP solver")
    group.add_argument("--seed", type=int, metavar="N", help="Random seed")
    group.add_argument("--folds", type=int, metavar="N", help="Cross-validation folds")
    group.add_argument("--jobs", type=int, metavar="N", help="Worker processes")
    group.add_argument("--out", metavar="PATH", help="Output file (default: stdout)")
    group.add_argument("--format", choices=("md", "csv", "json"), default="md", help="Report format")
    group.add_argument("--scaling", choices=("none", "minmax", "standard"), help="Feature scaling")
    group.add_argument("--degree", type=int, metavar="N", help="Polynomial kernel degree")
    group.add_argument("--coef0", type=float, metavar="F", help="Polynomial kernel offset")
    group.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Log verbosity")


def load_dataset(args) -> Dataset:
    if not args.data:
        raise InvalidParameterError("--data is required")
    positive = args.positive if args.positive is not None else "1"
    if Path(args.data).suffix.lower() in SPARSE_SUFFIXES:
        return load_sparse(args.data, positive_label=positive)
    label_column = args.label_col if args.label_col is not None else -1
    return load_csv(args.data, label_column=label_column, positive_label=positive)


def scaling_kind(args) -> str:
    return args.scaling or settings.scaling


def kernel_spec(args, dataset: Optional[Dataset] = None) -> Optional[KernelSpec]:
    """
    Kernel from flags; None selects the hyperplane model.

    An rbf kernel without ``--gamma`` uses 1 / n_features when a dataset is
    given, otherwise the first grid value.
    """
    if args.kernel == "linear":
        return None
    if args.kernel == "poly":
        return KernelSpec(
            kind=KernelKind.POLYNOMIAL,
            degree=args.degree if args.degree is not None else DEFAULT_POLY_DEGREE,
            coef0=args.coef0 if args.coef0 is not None else DEFAULT_POLY_COEF0,
        )
    gamma = args.gamma
    if gamma is None:
        gamma = 1.0 / dataset.n_features if dataset is not None else settings.grid_gamma_list[0]
    return KernelSpec(kind=KernelKind.RBF, gamma=gamma)


def dynamics_config(args) -> Tuple[DynamicsConfig, Union[float, str, None]]:
    """Integration settings from flags, plus the ``--k`` override for training."""
    overrides = {
        "step_size": args.step,
        "convergence_tol": args.tol,
        "max_time": args.max_time,
        "integrator": INTEGRATOR_FLAGS[args.integrator] if args.integrator else None,
        "rng_seed": args.seed,
        "trace_stride": getattr(args, "trace_stride", None),
    }
    k = args.k
    if isinstance(k, float):
        overrides["k"] = k
    config = DynamicsConfig(**{key: value for key, value in overrides.items() if value is not None})
    return config, k


def emit(text: str, out: Optional[str]) -> None:
    """Write a data product to ``out`` or stdout."""
    if not out:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataIOError(f"Cannot write {out}: {exc}")


def log_slow_defaults_hint(args, k: Union[float, str, None]) -> None:
    """Suggest the adaptive settings when a fixed gain meets a fixed-step integrator."""
    integrator = INTEGRATOR_FLAGS[args.integrator] if args.integrator else Integrator(settings.integrator)
    if args.backend == "dynamics" and k != "auto" and integrator is not Integrator.RK45_ADAPTIVE:
        logger.info(SLOW_DEFAULTS_HINT)

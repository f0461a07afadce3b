"""
Report rendering for cross-validation results.

Markdown rows mirror the published benchmark tables (dataset, size, accuracy
mean +/- std, #SVs mean +/- std) with the published numbers alongside as
reference columns.
"""

from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple
import csv
import io
import json
import logging

from mcm_dynamics import __version__
from mcm_dynamics.exceptions import InvalidParameterError
from mcm_dynamics.schemas.bench import RunResult

logger = logging.getLogger(__name__)

REPORT_FORMATS = ("md", "csv", "json")

CSV_COLUMNS = (
    "dataset",
    "n_samples",
    "n_features",
    "accuracy_mean",
    "accuracy_std",
    "sv_mean",
    "sv_std",
    "C",
    "gamma",
    "n_folds",
    "converged",
)

Stat = Tuple[float, float]


@dataclass(frozen=True)
class PublishedBaseline:
    """Published (mean, std) pairs for one benchmark dataset."""

    shape: Tuple[int, int]
    linear_mcm: Stat
    linear_svm: Stat
    kernel_mcm: Optional[Stat] = None
    kernel_mcm_sv: Optional[Stat] = None
    kernel_svm: Optional[Stat] = None
    kernel_svm_sv: Optional[Stat] = None


# Transcribed, never recomputed. Voting has no published kernel row.
PUBLISHED_BASELINES: Dict[str, PublishedBaseline] = {
    "hayes-roth": PublishedBaseline(
        (132, 5), (76.11, 8.72), (73.56, 7.73), (81.45, 7.98), (33.23, 1.11), (79.57, 6.60), (84.20, 2.04)
    ),
    "hepatitis": PublishedBaseline(
        (165, 19), (69.35, 8.71), (60.64, 7.19), (79.35, 4.09), (20.00, 0.00), (82.57, 6.32), (72.20, 4.31)
    ),
    "ta-evaluation": PublishedBaseline(
        (151, 5), (69.52, 6.92), (64.94, 6.56), (80.86, 6.87), (26.60, 32.43), (68.88, 6.48), (86.00, 3.22)
    ),
    "promoters": PublishedBaseline(
        (106, 58), (68.92, 6.91), (67.78, 10.97), (69.87, 7.85), (84.8, 0.44), (66.45, 6.52), (94.0, 0.70)
    ),
    "voting": PublishedBaseline((435, 16), (95.97, 3.75), (94.48, 2.46)),
    "australian": PublishedBaseline(
        (690, 14), (85.79, 2.59), (84.49, 1.18), (76.95, 2.63), (152.0, 4.86), (66.23, 1.84), (244.8, 4.604)
    ),
    "bands": PublishedBaseline(
        (512, 39), (72.58, 3.98), (71.69, 3.81), (77.88, 4.14), (341.2, 0.44), (75.69, 3.81), (427.6, 3.78)
    ),
    "fertility": PublishedBaseline(
        (100, 10), (86.00, 6.91), (86.00, 9.01), (88.00, 1.03), (9.80, 19.60), (88.00, 9.27), (38.20, 1.60)
    ),
    "spect": PublishedBaseline(
        (267, 22), (91.46, 4.28), (91.99, 4.90), (91.99, 4.90), (49.6, 0.54), (84.21, 4.90), (50.2, 9.88)
    ),
    "haberman": PublishedBaseline(
        (306, 3), (72.01, 3.54), (72.56, 3.73), (76.45, 4.37), (71.0, 0.414), (72.89, 4.58), (137.4, 3.36)
    ),
    "planning-relax": PublishedBaseline(
        (182, 13), (72.41, 7.81), (71.42, 7.37), (78.57, 8.23), (116.8, 0.54), (71.42, 8.43), (145.6, 6.45)
    ),
}


def _pm(stat: Optional[Stat]) -> str:
    return "-" if stat is None else f"{stat[0]:.2f} ± {stat[1]:.2f}"


def _published(result: RunResult) -> Tuple[Optional[Stat], Optional[Stat], Optional[Stat], Optional[Stat]]:
    """Published (MCM acc, SVM acc, MCM #SV, SVM #SV) matching the run's mode."""
    baseline = PUBLISHED_BASELINES.get(result.dataset_name)
    if baseline is None:
        return None, None, None, None
    if result.mode == "linear":
        return baseline.linear_mcm, baseline.linear_svm, None, None
    return baseline.kernel_mcm, baseline.kernel_svm, baseline.kernel_mcm_sv, baseline.kernel_svm_sv


def _ordered(results: Sequence[RunResult]) -> List[RunResult]:
    if not results:
        raise InvalidParameterError("No results to report")
    return sorted(results, key=lambda result: (result.dataset_name, result.mode, result.backend))


def _markdown(results: List[RunResult]) -> str:
    header = (
        "| Dataset | Size | Mode | Accuracy (%) | #SVs | C | gamma | Converged "
        "| Published MCM | Published SVM | Published MCM #SVs | Published SVM #SVs |"
    )
    lines = [header, "|" + "---|" * 12]
    for result in results:
        mcm_acc, svm_acc, mcm_sv, svm_sv = _published(result)
        converged = sum(result.converged)
        gamma = "-" if result.chosen_gamma is None else f"{result.chosen_gamma:g}"
        lines.append(
            f"| {result.dataset_name} | {result.n_samples}×{result.n_features} | {result.mode} "
            f"| {result.accuracy_mean:.2f} ± {result.accuracy_std:.2f} "
            f"| {result.sv_mean:.2f} ± {result.sv_std:.2f} "
            f"| {result.chosen_C:g} | {gamma} | {converged}/{result.n_folds} "
            f"| {_pm(mcm_acc)} | {_pm(svm_acc)} | {_pm(mcm_sv)} | {_pm(svm_sv)} |"
        )
    return "\n".join(lines) + "\n"


def _csv(results: List[RunResult]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for result in results:
        writer.writerow([
            result.dataset_name,
            result.n_samples,
            result.n_features,
            f"{result.accuracy_mean:.17g}",
            f"{result.accuracy_std:.17g}",
            f"{result.sv_mean:.17g}",
            f"{result.sv_std:.17g}",
            f"{result.chosen_C:.17g}",
            f"{result.chosen_gamma or 0.0:.17g}",
            result.n_folds,
            int(result.all_converged),
        ])
    return buffer.getvalue()


def _json(results: List[RunResult], include_timing: bool) -> str:
    exclude = None if include_timing else {"wall_times"}
    entries = []
    for result in results:
        entry = result.model_dump(mode="json", exclude=exclude)
        baseline = PUBLISHED_BASELINES.get(result.dataset_name)
        entry["published"] = asdict(baseline) if baseline is not None else None
        entries.append(entry)
    document = {"tool_version": __version__, "results": entries}
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def emit_report(results: Sequence[RunResult], fmt: str = "md", include_timing: bool = False) -> str:
    """
    Render cross-validation results.

    Args:
        results: One RunResult per dataset (and mode)
        fmt: "md", "csv" or "json"
        include_timing: Keep per-fold wall times in the JSON document;
            off by default so identical runs give identical reports

    Returns:
        The report text, rows ordered by dataset name
    """
    if fmt not in REPORT_FORMATS:
        raise InvalidParameterError(f"Unknown report format '{fmt}'; choose from {', '.join(REPORT_FORMATS)}")
    ordered = _ordered(results)
    logger.debug(f"Rendering {len(ordered)} results as {fmt}")
    if fmt == "md":
        return _markdown(ordered)
    if fmt == "csv":
        return _csv(ordered)
    return _json(ordered, include_timing)

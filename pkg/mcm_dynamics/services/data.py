"""
Dataset ingestion, scaling, synthetic generation and fold splitting.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import IO, List, Optional, Sequence, Tuple, Union
import csv
import hashlib
import io
import logging

import numpy as np
from sklearn.datasets import load_svmlight_file
from sklearn.model_selection import KFold, StratifiedKFold

from mcm_dynamics.exceptions import (
    DataIOError,
    DataParseError,
    DimensionMismatchError,
    InvalidDatasetError,
    InvalidParameterError,
)
from mcm_dynamics.schemas.data import CVPlan, Dataset, ScalingKind, ScalingParams

logger = logging.getLogger(__name__)

MISSING_TOKENS = {"", "?", "na", "nan", "null"}
SYNTHETIC_KINDS = ("separable-blobs", "gaussian-overlap")


@dataclass(frozen=True)
class UCIDataset:
    """Where a benchmark file lives and how to read it."""

    file_name: str
    label_column: str
    positive_label: str
    published_shape: Tuple[int, int]
    missing: str = "error"
    delimiter: Optional[str] = ","
    drop_columns: Tuple[int, ...] = ()


# Categorical sets (promoters, voting, bands) are expected as numerically
# encoded copies; everything else is the repository file as distributed.
UCI_DATASETS = {
    "haberman": UCIDataset("haberman.data", "-1", "1", (306, 3)),
    "fertility": UCIDataset("fertility_Diagnosis.txt", "-1", "N", (100, 10)),
    "hayes-roth": UCIDataset("hayes-roth.data", "-1", "1", (132, 5), drop_columns=(0,)),
    "hepatitis": UCIDataset("hepatitis.data", "0", "1", (165, 19), missing="drop"),
    "ta-evaluation": UCIDataset("tae.data", "-1", "1", (151, 5)),
    "promoters": UCIDataset("promoters.csv", "0", "+", (106, 58)),
    "voting": UCIDataset("house-votes-84.csv", "0", "democrat", (435, 16), missing="drop"),
    "australian": UCIDataset("australian.dat", "-1", "1", (690, 14), delimiter=None),
    "bands": UCIDataset("bands.csv", "-1", "1", (512, 39), missing="drop"),
    "spect": UCIDataset("SPECT.csv", "0", "1", (267, 22)),
    "planning-relax": UCIDataset("plrx.txt", "-1", "1", (182, 13), delimiter=None),
}


def _is_number(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_TOKENS


def _read_rows(path: Union[str, Path], delimiter: Optional[str]) -> List[List[str]]:
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise DataIOError(f"Cannot read {path}: {exc}")
    if delimiter is None:
        rows = [line.split() for line in text.splitlines()]
    else:
        rows = [[cell.strip() for cell in row] for row in csv.reader(io.StringIO(text), delimiter=delimiter)]
    return rows


def _resolve_column(column: Union[str, int], header: Optional[List[str]], width: int) -> int:
    if header is not None and isinstance(column, str) and column in header:
        return header.index(column)
    try:
        index = int(column)
    except (TypeError, ValueError):
        raise DataParseError(f"Column '{column}' not found", column=str(column))
    if not -width <= index < width:
        raise DataParseError(f"Column index {index} out of range for {width} columns", column=str(column))
    return index % width


def _same_label(cell: str, positive_label: str) -> bool:
    if cell == positive_label:
        return True
    if _is_number(cell) and _is_number(positive_label):
        return float(cell) == float(positive_label)
    return False


def load_csv(
    path: Union[str, Path],
    label_column: Union[str, int] = -1,
    positive_label: str = "1",
    has_header: Optional[bool] = None,
    missing: str = "error",
    delimiter: Optional[str] = ",",
    drop_columns: Sequence[int] = (),
    name: Optional[str] = None,
) -> Dataset:
    """
    Load a delimited file, binarizing labels positive-vs-rest.

    Args:
        path: File to read
        label_column: Header name or column index (negative counts from the end)
        positive_label: Label value mapped to +1; every other value maps to -1
        has_header: Force header handling; None detects a non-numeric first row
        missing: "error" rejects missing cells, "drop" skips incomplete rows
        delimiter: Field separator, or None for runs of whitespace
        drop_columns: Column indices ignored entirely (identifiers)
        name: Dataset name (defaults to the file stem)

    Returns:
        Unscaled Dataset
    """
    if missing not in ("error", "drop"):
        raise InvalidParameterError(f"missing must be 'error' or 'drop', got '{missing}'")

    rows = [(row_num, row) for row_num, row in enumerate(_read_rows(path, delimiter), start=1) if any(row)]
    if not rows:
        raise DataParseError(f"{path} contains no rows")

    first = rows[0][1]
    width = len(first)
    dropped = {c % width for c in drop_columns}
    if has_header is None:
        named = isinstance(label_column, str) and not _is_number(label_column)
        if named and label_column in first:
            has_header = True
        else:
            label_index = _resolve_column(label_column, None, width)
            has_header = any(
                not _is_number(cell) and not _is_missing(cell)
                for i, cell in enumerate(first)
                if i != label_index and i not in dropped
            )
    header = None
    if has_header:
        header = first
        rows = rows[1:]
    label_index = _resolve_column(label_column, header, width)
    feature_columns = [i for i in range(width) if i != label_index and i not in dropped]
    column_names = [header[i] if header else f"x{i + 1}" for i in feature_columns]

    features: List[List[float]] = []
    labels: List[int] = []
    skipped = 0
    for row_num, row in rows:
        if len(row) != width:
            raise DataParseError(
                f"Row {row_num}: expected {width} fields, found {len(row)}", row=row_num
            )
        cells = [row[i] for i in feature_columns]
        label_cell = row[label_index]
        incomplete = _is_missing(label_cell) or any(_is_missing(cell) for cell in cells)
        if incomplete:
            if missing == "drop":
                skipped += 1
                continue
            position = next(
                (name for name, cell in zip(column_names, cells) if _is_missing(cell)),
                "label",
            )
            raise DataParseError(
                f"Row {row_num}, column '{position}': missing value", row=row_num, column=position
            )
        values = []
        for column_name, cell in zip(column_names, cells):
            try:
                values.append(float(cell))
            except ValueError:
                raise DataParseError(
                    f"Row {row_num}, column '{column_name}': cannot parse '{cell}' as a number",
                    row=row_num,
                    column=column_name,
                )
        features.append(values)
        labels.append(1 if _same_label(label_cell, positive_label) else -1)

    if skipped:
        logger.warning(f"Dropped {skipped} incomplete rows from {path}")
    if not features:
        raise InvalidDatasetError(f"{path} has no complete rows")

    dataset = Dataset(
        features=np.array(features, dtype=float),
        labels=np.array(labels),
        name=name or Path(path).stem,
        feature_names=tuple(column_names),
        source=str(path),
    )
    logger.info(f"Loaded {dataset.name}: {dataset.n_samples} x {dataset.n_features} from {path}")
    return dataset


def load_sparse(path: Union[str, Path], positive_label: str = "1", name: Optional[str] = None) -> Dataset:
    """Load the ``label idx:val ...`` format."""
    try:
        features, raw_labels = load_svmlight_file(str(path))
    except OSError as exc:
        raise DataIOError(f"Cannot read {path}: {exc}")
    except ValueError as exc:
        raise DataParseError(f"Cannot parse {path}: {exc}")
    target = float(positive_label)
    labels = np.where(raw_labels == target, 1, -1)
    dataset = Dataset(
        features=features.toarray(),
        labels=labels,
        name=name or Path(path).stem,
        source=str(path),
    )
    logger.info(f"Loaded {dataset.name}: {dataset.n_samples} x {dataset.n_features} from {path}")
    return dataset


def load_feature_matrix(
    path: Union[str, Path],
    drop_column: Optional[Union[str, int]] = None,
    has_header: Optional[bool] = None,
    delimiter: Optional[str] = ",",
) -> np.ndarray:
    """Numeric matrix for prediction; ``drop_column`` removes a label column if present."""
    rows = [(row_num, row) for row_num, row in enumerate(_read_rows(path, delimiter), start=1) if any(row)]
    if not rows:
        raise DataParseError(f"{path} contains no rows")
    header = None
    if has_header is None:
        has_header = any(not _is_number(cell) for cell in rows[0][1])
    if has_header:
        header = rows[0][1]
        rows = rows[1:]
    width = len(rows[0][1]) if rows else 0
    skip = _resolve_column(drop_column, header, width) if drop_column is not None else None

    matrix = []
    for row_num, row in rows:
        if len(row) != width:
            raise DataParseError(f"Row {row_num}: expected {width} fields, found {len(row)}", row=row_num)
        values = []
        for i, cell in enumerate(row):
            if i == skip:
                continue
            try:
                values.append(float(cell))
            except ValueError:
                column = header[i] if header else str(i + 1)
                raise DataParseError(
                    f"Row {row_num}, column '{column}': cannot parse '{cell}' as a number",
                    row=row_num,
                    column=column,
                )
        matrix.append(values)
    return np.array(matrix, dtype=float)


def load_uci(key: str, directory: Union[str, Path]) -> Dataset:
    """Load a registered benchmark file from ``directory``."""
    if key not in UCI_DATASETS:
        raise InvalidParameterError(f"Unknown benchmark dataset '{key}'")
    entry = UCI_DATASETS[key]
    dataset = load_csv(
        Path(directory) / entry.file_name,
        label_column=entry.label_column,
        positive_label=entry.positive_label,
        has_header=False,
        missing=entry.missing,
        delimiter=entry.delimiter,
        drop_columns=entry.drop_columns,
        name=key,
    )
    if dataset.shape != entry.published_shape:
        logger.info(f"{key}: loaded shape {dataset.shape}, published shape {entry.published_shape}")
    return dataset


def write_csv(dataset: Dataset, target: Union[str, Path, IO[str]]) -> None:
    """Write features and a trailing ``label`` column with a header row."""
    if isinstance(target, (str, Path)):
        try:
            with open(target, "w", newline="", encoding="utf-8") as handle:
                write_csv(dataset, handle)
        except OSError as exc:
            raise DataIOError(f"Cannot write {target}: {exc}")
        return
    names = dataset.feature_names or tuple(f"x{j + 1}" for j in range(dataset.n_features))
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow([*names, "label"])
    for row, label in zip(dataset.features, dataset.labels):
        writer.writerow([*(f"{value:.17g}" for value in row), int(label)])


def make_synthetic(kind: str, M: int, seed: int) -> Dataset:
    """
    Two-class 2-D data.

    separable-blobs: M/2 points per class drawn uniformly from disks of
    radius 1.5 centred at (2, 2) and (-2, -2); always linearly separable.
    gaussian-overlap: unit-variance normals centred at (1, 0) and (-1, 0).

    Args:
        kind: "separable-blobs" or "gaussian-overlap"
        M: Even sample count, at least 4
        seed: RNG seed

    Returns:
        Dataset named ``<kind>-<M>-<seed>``
    """
    if kind not in SYNTHETIC_KINDS:
        raise InvalidParameterError(f"Unknown synthetic kind '{kind}'; choose from {', '.join(SYNTHETIC_KINDS)}")
    if M < 4 or M % 2:
        raise InvalidParameterError(f"M must be even and at least 4, got {M}")

    rng = np.random.default_rng(seed)
    half = M // 2
    if kind == "separable-blobs":
        radius = 1.5 * np.sqrt(rng.uniform(0.0, 1.0, size=M))
        angle = rng.uniform(0.0, 2.0 * np.pi, size=M)
        offsets = np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])
        centres = np.vstack([np.tile([2.0, 2.0], (half, 1)), np.tile([-2.0, -2.0], (half, 1))])
    else:
        offsets = rng.standard_normal((M, 2))
        centres = np.vstack([np.tile([1.0, 0.0], (half, 1)), np.tile([-1.0, 0.0], (half, 1))])
    labels = np.concatenate([np.ones(half, dtype=int), -np.ones(half, dtype=int)])
    order = rng.permutation(M)

    return Dataset(
        features=(centres + offsets)[order],
        labels=labels[order],
        name=f"{kind}-{M}-{seed}",
        feature_names=("x1", "x2"),
    )


def fit_scaling(features: Union[Dataset, np.ndarray], kind: Union[str, ScalingKind]) -> ScalingParams:
    """Per-feature scaling parameters; constant columns keep scale 1."""
    X = features.features if isinstance(features, Dataset) else np.asarray(features, dtype=float)
    kind = ScalingKind(kind)
    if kind is ScalingKind.MINMAX:
        offset = X.min(axis=0)
        scale = X.max(axis=0) - offset
    elif kind is ScalingKind.STANDARD:
        offset = X.mean(axis=0)
        scale = X.std(axis=0)
    else:
        offset = np.zeros(X.shape[1])
        scale = np.ones(X.shape[1])
    scale = np.where(scale > 0.0, scale, 1.0)
    return ScalingParams(kind=kind, offset=offset.tolist(), scale=scale.tolist())


def _check_width(params: ScalingParams, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != len(params.offset):
        raise DimensionMismatchError(
            f"Scaling expects {len(params.offset)} features, got {X.shape[1]}"
        )
    return X


def apply_scaling(params: ScalingParams, X) -> np.ndarray:
    X = _check_width(params, X)
    return (X - np.asarray(params.offset)) / np.asarray(params.scale)


def invert_scaling(params: ScalingParams, X) -> np.ndarray:
    X = _check_width(params, X)
    return X * np.asarray(params.scale) + np.asarray(params.offset)


def scale_dataset(dataset: Dataset, kind: Union[str, ScalingKind]) -> Dataset:
    """
    Scaled copy of ``dataset``.

    The stored parameters always map the original raw features, composing
    with any scaling already applied.
    """
    params = fit_scaling(dataset, kind)
    scaled = apply_scaling(params, dataset.features)
    if dataset.scaling is not None:
        previous_offset = np.asarray(dataset.scaling.offset)
        previous_scale = np.asarray(dataset.scaling.scale)
        params = ScalingParams(
            kind=params.kind,
            offset=(previous_offset + previous_scale * np.asarray(params.offset)).tolist(),
            scale=(previous_scale * np.asarray(params.scale)).tolist(),
        )
    return Dataset(
        features=scaled,
        labels=dataset.labels,
        name=dataset.name,
        scaling=params,
        feature_names=dataset.feature_names,
        source=dataset.source,
    )


def fingerprint(dataset: Dataset) -> str:
    """SHA-256 over shape, features and labels."""
    digest = hashlib.sha256()
    digest.update(f"{dataset.n_samples}x{dataset.n_features}".encode())
    digest.update(np.ascontiguousarray(dataset.features, dtype="<f8").tobytes())
    digest.update(np.ascontiguousarray(dataset.labels, dtype="<i8").tobytes())
    return digest.hexdigest()


def split_cv(dataset: Dataset, n_folds: int, seed: int) -> CVPlan:
    """
    Seeded fold assignment, stratified by label when every class has at
    least ``n_folds`` members.
    """
    if n_folds < 2:
        raise InvalidParameterError(f"n_folds must be at least 2, got {n_folds}")
    if dataset.n_samples < n_folds:
        raise InvalidParameterError(f"{dataset.n_samples} samples cannot fill {n_folds} folds")

    smallest_class = min(int(np.sum(dataset.labels == 1)), int(np.sum(dataset.labels == -1)))
    stratified = smallest_class >= n_folds
    placeholder = np.zeros((dataset.n_samples, 1))
    if stratified:
        splits = StratifiedKFold(n_splits=n_folds, shuffle=True, random_state=seed).split(placeholder, dataset.labels)
    else:
        logger.warning(
            f"{dataset.name}: smallest class has {smallest_class} samples for {n_folds} folds; "
            f"falling back to unstratified folds"
        )
        splits = KFold(n_splits=n_folds, shuffle=True, random_state=seed).split(placeholder)

    assignment = np.empty(dataset.n_samples, dtype=int)
    for fold, (_, test_index) in enumerate(splits):
        assignment[test_index] = fold
    return CVPlan(n_folds=n_folds, seed=seed, fold_assignment=tuple(assignment.tolist()), stratified=stratified)

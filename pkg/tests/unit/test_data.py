"""
Unit tests for dataset loading, scaling and fold assignment.
"""

import io

import numpy as np
import pytest

from mcm_dynamics.exceptions import (
    DataIOError,
    DataParseError,
    DimensionMismatchError,
    InvalidDatasetError,
    InvalidParameterError,
    LabelError,
)
from mcm_dynamics.schemas.data import Dataset, ScalingKind
from mcm_dynamics.services.data import (
    UCI_DATASETS,
    apply_scaling,
    fingerprint,
    fit_scaling,
    invert_scaling,
    load_csv,
    load_feature_matrix,
    load_sparse,
    load_uci,
    make_synthetic,
    scale_dataset,
    split_cv,
    write_csv,
)
from mcm_dynamics.services.lp_core import solve_reference
from mcm_dynamics.services.mcm import build_linear_mcm, extract_linear_model, training_accuracy


@pytest.mark.unit
class TestLoadCSV:
    """Test delimited file loading."""

    def test_positive_vs_rest(self, tmp_path):
        """Test that labels binarize against the positive value."""
        path = tmp_path / "abc.csv"
        path.write_text("x1,x2,label\n1,2,a\n3,4,b\n5,6,a\n")
        dataset = load_csv(path, label_column="label", positive_label="a")
        np.testing.assert_array_equal(dataset.labels, [1, -1, 1])
        assert dataset.shape == (3, 2)
        assert dataset.feature_names == ("x1", "x2")
        assert dataset.name == "abc"

    def test_headerless_numeric_labels(self, tmp_path):
        """Test a headerless file with the label in the last column."""
        path = tmp_path / "plain.data"
        path.write_text("1.0,2.0,1\n3.0,4.0,2\n")
        dataset = load_csv(path)
        np.testing.assert_array_equal(dataset.labels, [1, -1])
        np.testing.assert_array_equal(dataset.features, [[1.0, 2.0], [3.0, 4.0]])

    def test_text_in_feature_column(self, tmp_path):
        """Test that the parse error names the offending cell."""
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2,label\n1,2,a\n3,oops,b\n")
        with pytest.raises(DataParseError) as exc_info:
            load_csv(path, label_column="label", positive_label="a")
        assert exc_info.value.row == 3
        assert exc_info.value.column == "x2"

    def test_missing_values(self, tmp_path):
        """Test the error and drop rules for missing cells."""
        path = tmp_path / "missing.csv"
        path.write_text("1,2,1\n?,4,2\n5,6,1\n7,8,2\n")
        with pytest.raises(DataParseError):
            load_csv(path, has_header=False)
        dataset = load_csv(path, has_header=False, missing="drop")
        assert dataset.n_samples == 3

    def test_whitespace_delimited_and_dropped_column(self, tmp_path):
        """Test whitespace separation with an identifier column removed."""
        path = tmp_path / "ws.txt"
        path.write_text("101  0.5  1.5  1\n102  2.5  3.5  0\n")
        dataset = load_csv(path, delimiter=None, drop_columns=(0,), has_header=False)
        np.testing.assert_array_equal(dataset.features, [[0.5, 1.5], [2.5, 3.5]])

    def test_missing_file(self, tmp_path):
        """Test that an unreadable file is an I/O error."""
        with pytest.raises(DataIOError):
            load_csv(tmp_path / "nope.csv")

    def test_unknown_label_column(self, tmp_path):
        """Test that an unknown label column is a parse error."""
        path = tmp_path / "abc.csv"
        path.write_text("x1,label\n1,a\n")
        with pytest.raises(DataParseError):
            load_csv(path, label_column="target")


@pytest.mark.unit
class TestOtherLoaders:
    """Test sparse, feature-only and benchmark loaders."""

    def test_sparse(self, tmp_path):
        """Test the label idx:val format."""
        path = tmp_path / "data.svm"
        path.write_text("1 1:0.5 3:2.0\n-1 2:1.5\n")
        dataset = load_sparse(path, positive_label="1")
        np.testing.assert_array_equal(dataset.labels, [1, -1])
        np.testing.assert_array_equal(dataset.features, [[0.5, 0.0, 2.0], [0.0, 1.5, 0.0]])

    def test_feature_matrix_drops_label(self, tmp_path):
        """Test that the prediction loader removes a named label column."""
        path = tmp_path / "points.csv"
        path.write_text("x1,x2,label\n1,2,1\n3,4,-1\n")
        matrix = load_feature_matrix(path, drop_column="label")
        np.testing.assert_array_equal(matrix, [[1.0, 2.0], [3.0, 4.0]])

    def test_uci_registry_shapes(self):
        """Test that every benchmark entry records its published shape."""
        assert UCI_DATASETS["haberman"].published_shape == (306, 3)
        assert UCI_DATASETS["fertility"].published_shape == (100, 10)
        assert UCI_DATASETS["hayes-roth"].published_shape == (132, 5)
        assert len(UCI_DATASETS) == 11

    def test_uci_from_directory(self, tmp_path):
        """Test loading a registered file by key."""
        (tmp_path / "haberman.data").write_text("30,64,1,1\n30,62,3,1\n31,65,4,2\n")
        dataset = load_uci("haberman", tmp_path)
        assert dataset.name == "haberman"
        assert dataset.shape == (3, 3)
        np.testing.assert_array_equal(dataset.labels, [1, 1, -1])

    def test_unknown_uci_key(self, tmp_path):
        """Test that unknown keys are rejected."""
        with pytest.raises(InvalidParameterError):
            load_uci("iris", tmp_path)


@pytest.mark.unit
class TestDatasetValidation:
    """Test dataset invariants."""

    def test_labels_must_be_signs(self):
        """Test that labels outside {-1, +1} are rejected."""
        with pytest.raises(LabelError):
            Dataset(features=[[0.0], [1.0]], labels=[0, 1])

    def test_features_must_be_finite(self):
        """Test that NaN features are rejected."""
        with pytest.raises(InvalidDatasetError):
            Dataset(features=[[np.nan], [1.0]], labels=[1, -1])

    def test_row_count_must_match(self):
        """Test that feature rows and labels agree."""
        with pytest.raises(DimensionMismatchError):
            Dataset(features=[[0.0], [1.0]], labels=[1])


@pytest.mark.unit
class TestSynthetic:
    """Test synthetic generators."""

    def test_separable_blobs_are_fitted(self):
        """Test that an oracle-trained hyperplane fits separable blobs."""
        dataset = make_synthetic("separable-blobs", 20, seed=9)
        lp = build_linear_mcm(dataset, C=100.0)
        model = extract_linear_model(solve_reference(lp), dataset, C=100.0)
        assert training_accuracy(model, dataset) == 100.0

    def test_deterministic(self):
        """Test that the same seed gives the same data."""
        first = make_synthetic("gaussian-overlap", 200, seed=1)
        second = make_synthetic("gaussian-overlap", 200, seed=1)
        assert fingerprint(first) == fingerprint(second)

    def test_overlap_needs_slack(self):
        """Test that overlapping classes leave nonzero slacks for small C."""
        dataset = make_synthetic("gaussian-overlap", 40, seed=2)
        lp = build_linear_mcm(dataset, C=0.1)
        model = extract_linear_model(solve_reference(lp), dataset, C=0.1)
        assert max(model.slacks) > 0.0

    def test_bad_sample_count(self):
        """Test that odd or tiny sample counts are rejected."""
        with pytest.raises(InvalidParameterError):
            make_synthetic("separable-blobs", 5, seed=0)

    def test_write_then_load(self):
        """Test that a written synthetic set reads back with its labels."""
        dataset = make_synthetic("separable-blobs", 8, seed=0)
        buffer = io.StringIO()
        write_csv(dataset, buffer)
        assert buffer.getvalue().splitlines()[0] == "x1,x2,label"


@pytest.mark.unit
class TestScaling:
    """Test feature scaling."""

    def test_minmax(self):
        """Test that min-max maps each column onto [0, 1]."""
        dataset = Dataset(features=[[0.0, 10.0], [2.0, 20.0], [4.0, 30.0]], labels=[1, -1, 1])
        scaled = scale_dataset(dataset, ScalingKind.MINMAX)
        np.testing.assert_allclose(scaled.features.min(axis=0), [0.0, 0.0])
        np.testing.assert_allclose(scaled.features.max(axis=0), [1.0, 1.0])
        np.testing.assert_allclose(apply_scaling(scaled.scaling, [[2.0, 20.0]]), [[0.5, 0.5]])

    def test_constant_column_keeps_unit_scale(self):
        """Test that a constant column does not divide by zero."""
        params = fit_scaling(np.array([[3.0], [3.0]]), "standard")
        assert params.scale == [1.0]

    def test_invert(self):
        """Test that inversion restores raw features."""
        X = np.array([[1.0, -2.0], [3.0, 5.0], [0.0, 1.0]])
        params = fit_scaling(X, "standard")
        np.testing.assert_allclose(invert_scaling(params, apply_scaling(params, X)), X)

    def test_width_mismatch(self):
        """Test that scaling a matrix of the wrong width is rejected."""
        params = fit_scaling(np.ones((2, 2)), "minmax")
        with pytest.raises(DimensionMismatchError):
            apply_scaling(params, np.ones((1, 3)))


@pytest.mark.unit
class TestSplitCV:
    """Test fold assignment."""

    def test_two_even_folds(self):
        """Test that 10 samples split 5 and 5."""
        dataset = make_synthetic("gaussian-overlap", 10, seed=0)
        plan = split_cv(dataset, 2, seed=0)
        assert plan.fold_sizes == [5, 5]

    def test_stratified(self):
        """Test one sample per class in each of 5 folds."""
        dataset = make_synthetic("gaussian-overlap", 10, seed=0)
        plan = split_cv(dataset, 5, seed=3)
        assert plan.stratified
        for fold in range(5):
            labels = dataset.labels[plan.test_indices(fold)]
            assert sorted(labels.tolist()) == [-1, 1]

    def test_seeded(self):
        """Test that the same seed repeats the assignment."""
        dataset = make_synthetic("gaussian-overlap", 30, seed=0)
        assert split_cv(dataset, 5, seed=7).fold_assignment == split_cv(dataset, 5, seed=7).fold_assignment

    def test_unstratified_fallback(self):
        """Test that a tiny class falls back to plain folds."""
        dataset = Dataset(features=np.arange(10.0)[:, None], labels=[1] + [-1] * 9)
        plan = split_cv(dataset, 5, seed=0)
        assert not plan.stratified
        assert sorted(plan.fold_sizes) == [2, 2, 2, 2, 2]

    def test_too_few_folds(self):
        """Test that fewer than 2 folds is rejected."""
        dataset = make_synthetic("gaussian-overlap", 10, seed=0)
        with pytest.raises(InvalidParameterError):
            split_cv(dataset, 1, seed=0)

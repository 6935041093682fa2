import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from suri.data import (
    DataError,
    Dataset,
    PreprocessConfig,
    binarize_heart_labels,
    eeg_channel_stats,
    eeg_feature_names,
    jitter,
    load_csv,
    load_eeg_recordings,
    preprocess,
    standardize,
)

from conftest import HEART_RAW_CSV


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestDataset:
    def test_rejects_single_class(self):
        with pytest.raises(DataError, match="single class"):
            Dataset(np.zeros((3, 1)), [1, 1, 1], ["a"])

    def test_rejects_duplicate_names(self):
        with pytest.raises(DataError, match="unique"):
            Dataset(np.zeros((2, 2)), [0, 1], ["a", "a"])

    def test_rejects_nonfinite(self):
        X = np.array([[1.0], [np.inf]])
        with pytest.raises(DataError, match="row 1"):
            Dataset(X, [0, 1], ["a"])

    def test_immutable(self):
        d = Dataset(np.zeros((2, 1)), [0, 1], ["a"])
        with pytest.raises(ValueError):
            d.features[0, 0] = 1.0


class TestLoadCsv:
    def test_small_file(self, tmp_path):
        p = write(tmp_path, "a,b,y\n1,2,0\n3,4,1\n5,6,0\n7,8,1\n")
        d = load_csv(p, "y")
        assert (d.n_samples, d.n_features) == (4, 2)
        assert d.feature_names == ("a", "b")
        np.testing.assert_array_equal(d.labels, [0, 1, 0, 1])

    def test_label_by_index_and_no_header(self, tmp_path):
        p = write(tmp_path, "1,2,0\n3,4,1\n")
        d = load_csv(p, 0, has_header=False)
        assert d.feature_names == ("x1", "x2")
        np.testing.assert_array_equal(d.labels, [0, 1])

    def test_nan_cell_is_named(self, tmp_path):
        p = write(tmp_path, "a,b,y\n1,2,0\n3,NaN,1\n")
        with pytest.raises(DataError, match=r"row 2, column 'b'"):
            load_csv(p, "y")

    def test_question_mark_missing_dropped_on_request(self, tmp_path):
        p = write(tmp_path, "a,y\n1,0\n?,1\n2,1\n3,0\n")
        with pytest.raises(DataError, match="missing"):
            load_csv(p, "y")
        d = load_csv(p, "y", drop_missing=True)
        assert d.n_samples == 3

    def test_mixed_column_is_unparseable(self, tmp_path):
        p = write(tmp_path, "a,y\n1,0\nfoo,1\n")
        with pytest.raises(DataError, match=r"unparseable value 'foo' at row 2"):
            load_csv(p, "y")

    def test_categorical_first_appearance(self, tmp_path):
        p = write(tmp_path, "color,y\nred,a\nblue,b\nred,b\ngreen,a\n")
        d = load_csv(p, "y")
        np.testing.assert_array_equal(d.features[:, 0], [0, 1, 0, 2])
        assert d.categorical_maps == {"color": {"red": 0, "blue": 1, "green": 2}}
        assert d.label_map == {0: "a", 1: "b"}

    def test_numeric_labels_coded_by_value(self, tmp_path):
        p = write(tmp_path, "a,y\n1,4\n2,0\n3,2\n")
        d = load_csv(p, "y")
        np.testing.assert_array_equal(d.labels, [2, 0, 1])
        assert d.label_map == {0: "0", 1: "2", 2: "4"}

    def test_single_class_label(self, tmp_path):
        p = write(tmp_path, "a,y\n1,0\n2,0\n")
        with pytest.raises(DataError, match="single class"):
            load_csv(p, "y")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            load_csv(tmp_path / "nope.csv", "y")

    def test_missing_label_column(self, tmp_path):
        p = write(tmp_path, "a,y\n1,0\n2,1\n")
        with pytest.raises(DataError, match="not in header"):
            load_csv(p, "label")

    def test_heart_file_shape(self, heart_raw):
        assert (heart_raw.n_samples, heart_raw.n_features) == (303, 13)


class TestHeartLabels:
    @pytest.mark.parametrize("raw, expected", [(0, 0), (1, 1), (2, 1), (3, 1), (4, 1)])
    def test_mapping(self, raw, expected):
        assert binarize_heart_labels([raw])[0] == expected

    def test_out_of_range(self):
        with pytest.raises(DataError):
            binarize_heart_labels([0, 5])

    def test_preserves_order(self):
        np.testing.assert_array_equal(binarize_heart_labels([3, 0, 1, 0]), [1, 0, 1, 0])

    def test_cleveland_counts(self, heart_raw):
        assert np.bincount(heart_raw.labels).tolist() == [164, 139]


class TestEeg:
    def test_constant_channel(self):
        np.testing.assert_array_equal(eeg_channel_stats([[5, 5, 5]]), [5, 5, 5, 0, 0, 0])

    def test_ramp(self):
        sigma = np.sqrt(((1 - 7 / 3) ** 2 + (2 - 7 / 3) ** 2 + (4 - 7 / 3) ** 2) / 3)
        np.testing.assert_allclose(eeg_channel_stats([[1, 2, 4]]), [7 / 3, 4, 1, sigma, 2, 1])
        assert sigma == pytest.approx(1.2472, abs=1e-4)

    def test_min_change_is_signed(self):
        assert eeg_channel_stats([[3, 1, 2]])[5] == -2

    def test_64_channels(self):
        sig = np.random.default_rng(0).normal(size=(64, 100))
        assert eeg_channel_stats(sig).shape == (384,)
        assert len(eeg_feature_names(64)) == 384

    def test_too_short(self):
        with pytest.raises(DataError):
            eeg_channel_stats([[1.0]])

    @given(st.integers(1, 8), st.integers(2, 20))
    def test_length(self, channels, T):
        sig = np.arange(channels * T, dtype=float).reshape(channels, T)
        assert eeg_channel_stats(sig).size == 6 * channels

    def test_recordings(self, tmp_path):
        paths = []
        for i in range(3):
            p = tmp_path / f"r{i}.csv"
            np.savetxt(p, np.arange(8).reshape(2, 4) * (i + 1), delimiter=",")
            paths.append(p)
        d = load_eeg_recordings(paths, [0, 1, 0])
        assert d.features.shape == (3, 12)
        assert d.feature_names[:2] == ("ch0_mean", "ch0_max")


class TestStandardize:
    def test_unit_column(self):
        d = Dataset([[1.0], [2.0], [3.0]], [0, 1, 0], ["a"])
        z = standardize(d).features[:, 0]
        assert z.mean() == pytest.approx(0, abs=1e-15)
        assert z.std(ddof=1) == pytest.approx(1)

    def test_constant_column_warns(self, caplog):
        d = Dataset([[1.0, 4.0], [2.0, 4.0], [3.0, 4.0]], [0, 1, 0], ["a", "b"])
        with caplog.at_level(logging.WARNING):
            z = standardize(d)
        np.testing.assert_array_equal(z.features[:, 1], 0)
        assert "constant" in caplog.text

    @settings(max_examples=50)
    @given(hnp.arrays(np.float64, (12, 3), elements=st.floats(-1e3, 1e3)))
    def test_idempotent(self, X):
        d = Dataset(X, [0, 1] * 6, ["a", "b", "c"])
        once = standardize(d)
        np.testing.assert_allclose(standardize(once).features, once.features, atol=1e-12)


class TestJitter:
    d = Dataset(np.tile([[0.0], [1.0]], (50, 1)), [0, 1] * 50, ["a"])

    def test_zero_amplitude(self):
        out = jitter(self.d, PreprocessConfig(jitter_amplitude=0))
        np.testing.assert_array_equal(out.features, self.d.features)

    def test_deterministic(self):
        cfg = PreprocessConfig(jitter_amplitude=1e-10, rng_seed=7)
        assert jitter(self.d, cfg).features.tobytes() == jitter(self.d, cfg).features.tobytes()

    def test_breaks_ties(self):
        out = jitter(self.d, PreprocessConfig(jitter_amplitude=1e-10))
        assert np.unique(out.features[:, 0]).size == self.d.n_samples
        assert np.max(np.abs(out.features - self.d.features)) <= 1e-10

    def test_negative_amplitude_rejected(self):
        with pytest.raises(ValueError):
            PreprocessConfig(jitter_amplitude=-1)

    def test_pipeline_preserves_shape_and_labels(self, heart_raw):
        out = preprocess(heart_raw, PreprocessConfig())
        assert out.features.shape == heart_raw.features.shape
        np.testing.assert_array_equal(out.labels, heart_raw.labels)


class TestHeartMissingCells:
    def test_reports_first_missing_cell(self):
        with pytest.raises(DataError, match=r"row 88, column 'thal'"):
            load_csv(HEART_RAW_CSV, "num")

    def test_drop_missing_rows(self):
        d = load_csv(HEART_RAW_CSV, "num", drop_missing=True)
        assert (d.n_samples, d.n_features) == (297, 13)

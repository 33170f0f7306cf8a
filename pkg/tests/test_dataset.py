import logging
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from mentalstate.dataset import (
    ClassLabel,
    LabeledDataset,
    SplitSpec,
    load_band_csv,
    load_raw_sessions,
    split,
    split_indices,
    to_windows,
    write_band_csv,
)
from mentalstate.errors import DataError, ParameterError, SchemaError
from mentalstate.signal import BAND_NAMES
from mentalstate.synthetic import make_blob_sessions, write_raw_session

KAGGLE_HEADER = ["SubjectID", "VideoID", "Attention", *BAND_NAMES, "predefinedlabel", "user-definedlabeln"]


def write_csv(path, header, rows):
    path.write_text("\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n")
    return path


@pytest.fixture
def demographics(tmp_path):
    return write_csv(tmp_path / "demo.csv", ["subject_id", "gender", "age"], [[0, "M", 25], [1, "F", 24]])


def kaggle_row(subject, label, base=1.0):
    return [subject, 0, 50] + [base * (k + 1) for k in range(8)] + [0, label]


class TestBandCsv:
    def test_three_lines(self, tmp_path, demographics):
        path = write_csv(tmp_path / "eeg.csv", KAGGLE_HEADER, [kaggle_row(0, 0), kaggle_row(0, 1), kaggle_row(1, 0)])
        ds = load_band_csv(path, demographics)
        assert len(ds) == 3
        assert ds.class_counts == (2, 1, 0)
        assert ds.X[0].tolist() == [1, 2, 3, 4, 5, 6, 7, 8, 0, 1, 25]
        assert ds.X[2, 8:].tolist() == [1, 0, 24]
        assert set(ds.provenance) == {"band-csv"}

    def test_subject_ids_as_floats(self, tmp_path, demographics):
        path = write_csv(tmp_path / "eeg.csv", KAGGLE_HEADER, [kaggle_row("1.0", 0)])
        assert load_band_csv(path, demographics).subject.tolist() == ["1"]

    def test_missing_theta(self, tmp_path, demographics):
        header = [h for h in KAGGLE_HEADER if h != "Theta"]
        row = kaggle_row(0, 0)
        del row[4]
        path = write_csv(tmp_path / "eeg.csv", header, [row])
        with pytest.raises(SchemaError, match="Theta"):
            load_band_csv(path, demographics)

    def test_reordered_columns(self, tmp_path, demographics):
        rows = [kaggle_row(0, 0, 1.5), kaggle_row(1, 1, 2.5)]
        canonical = load_band_csv(write_csv(tmp_path / "a.csv", KAGGLE_HEADER, rows), demographics)
        perm = [0, 1, 2] + [3 + k for k in (7, 2, 5, 0, 1, 6, 3, 4)] + [11, 12]
        shuffled_header = [KAGGLE_HEADER[p] for p in perm][::-1]
        shuffled_rows = [[r[p] for p in perm][::-1] for r in rows]
        other = load_band_csv(write_csv(tmp_path / "b.csv", shuffled_header, shuffled_rows), demographics)
        for name in ("X", "y", "subject", "session", "frame_index"):
            assert np.array_equal(getattr(canonical, name), getattr(other, name))

    def test_unknown_subject(self, tmp_path, demographics):
        path = write_csv(tmp_path / "eeg.csv", KAGGLE_HEADER, [kaggle_row(7, 0), kaggle_row(9, 0)])
        with pytest.raises(DataError, match="7, 9"):
            load_band_csv(path, demographics)

    def test_predefined_label_column(self, tmp_path, demographics):
        row = kaggle_row(0, 0)
        row[11] = 1
        ds = load_band_csv(write_csv(tmp_path / "eeg.csv", KAGGLE_HEADER, [row]), demographics, "predefinedlabel")
        assert ds.y.tolist() == [ClassLabel.CONFUSED]

    def test_bad_label(self, tmp_path, demographics):
        path = write_csv(tmp_path / "eeg.csv", KAGGLE_HEADER, [kaggle_row(0, 2)])
        with pytest.raises(DataError, match="line 2"):
            load_band_csv(path, demographics)

    def test_canonical_roundtrip(self, tmp_path):
        ds = make_blob_sessions(2, 7)
        write_band_csv(tmp_path / "c.csv", ds)
        back = load_band_csv(tmp_path / "c.csv")
        for name in ("X", "y", "subject", "session", "frame_index"):
            assert np.array_equal(getattr(ds, name), getattr(back, name))


class TestRawSessions:
    def test_ten_seconds(self, tmp_path):
        write_raw_session(tmp_path, "s01", duration_s=10.0)
        ds = load_raw_sessions(tmp_path)
        assert len(ds) == 20
        assert ds.class_counts == (0, 0, 20)
        assert ds.frame_index.tolist() == list(range(20))
        assert set(ds.provenance) == {"raw-session"}
        assert ds.X[0, 8:].tolist() == [1, 0, 30]
        # the 10 Hz tone of amplitude 20 dominates Alpha2 after DC removal
        assert np.all(ds.X[:, 3] == ds.X[:, :8].max(axis=1))
        assert ds.X[:, 3].mean() == pytest.approx(200, rel=0.05)

    def test_expert_filter(self, tmp_path):
        write_raw_session(tmp_path, "s01", duration_s=2.0)
        write_raw_session(tmp_path, "s02", duration_s=3.0, expertise="novice")
        assert set(load_raw_sessions(tmp_path).subject) == {"s01"}
        assert len(load_raw_sessions(tmp_path, expert_only=False)) == 10

    def test_empty_directory(self, tmp_path, caplog):
        with caplog.at_level(logging.WARNING, logger="mentalstate"):
            ds = load_raw_sessions(tmp_path)
        assert len(ds) == 0
        assert "no sessions" in caplog.text

    def test_missing_channel(self, tmp_path):
        write_raw_session(tmp_path, "s01", duration_s=1.0, channels=("Fp1",))
        with pytest.raises(DataError, match="A1"):
            load_raw_sessions(tmp_path)
        assert len(load_raw_sessions(tmp_path, channel="Fp1")) == 2

    def test_missing_meta(self, tmp_path):
        (write_raw_session(tmp_path, "s01", duration_s=1.0) / "meta.txt").unlink()
        with pytest.raises(DataError, match="meta"):
            load_raw_sessions(tmp_path)


def blank(n):
    return LabeledDataset.from_arrays(np.arange(n * 11.0).reshape(n, 11), np.arange(n) % 3)


class TestSplit:
    def test_ten(self):
        train, test = split(blank(10), SplitSpec(0.8))
        assert (len(train), len(test)) == (8, 2)

    def test_7255_rows_leave_1451_for_test(self):
        tr, te = split_indices(7255, SplitSpec())
        assert len(te) == 1451 and len(tr) == 5804

    def test_deterministic_and_partition(self):
        a = split_indices(100, SplitSpec(seed=3))
        b = split_indices(100, SplitSpec(seed=3))
        assert all(np.array_equal(x, y) for x, y in zip(a, b))
        assert sorted(np.concatenate(a).tolist()) == list(range(100))
        c = split_indices(100, SplitSpec(seed=4))
        assert not np.array_equal(a[0], c[0])

    def test_too_small(self):
        with pytest.raises(ParameterError):
            split(blank(4))

    @pytest.mark.parametrize("f", [0.0, 1.0, 1.5])
    def test_bad_fraction(self, f):
        with pytest.raises(ParameterError):
            SplitSpec(f)

    def test_permutation_uniform_over_seeds(self):
        counts = Counter()
        for seed in range(1000):
            tr, te = split_indices(5, SplitSpec(0.8, seed))
            counts[int(te[0])] += 1
        observed = [counts[i] for i in range(5)]
        assert stats.chisquare(observed).pvalue > 0.001

    def test_by_subject_is_disjoint(self):
        ds = make_blob_sessions(4, 10)
        train, test = split(ds, SplitSpec(by_subject=True))
        assert not set(train.subject) & set(test.subject)
        assert len(train) + len(test) == len(ds)


def test_windowed_labels_and_counts():
    ds = make_blob_sessions(2, 42)
    w = to_windows(ds)
    assert w.mode == "window" and w.X.shape == (18, 20, 11)
    assert w.class_counts == (6, 6, 6)


def test_invalid_label_rejected():
    with pytest.raises(DataError):
        LabeledDataset.from_arrays(np.zeros((1, 11)), [3])

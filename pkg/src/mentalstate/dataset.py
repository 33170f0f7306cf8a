"""Dataset ingestion (band-power CSV and raw sessions) and seeded train/test splits."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import DataError, FormatError, ParameterError, SchemaError
from .features import (
    N_CLASSES,
    N_FEATURES,
    WINDOW_STRIDE,
    WINDOW_WIDTH,
    Demographics,
    assemble,
    window_array,
    window_label,
)
from .signal import BAND_NAMES, DEFAULT_BANDS, BandTable, frame_band_powers, high_pass, read_channel_file

log = logging.getLogger(__name__)

SUBJECT_COLUMNS = ("subject_id", "SubjectID", "subject")
SESSION_COLUMNS = ("session_id", "VideoID", "session")
FRAME_COLUMNS = ("frame_index", "frame")
CONFUSION_COLUMNS = ("user-definedlabeln", "user-definedlabel", "confusion", "confused")
PREDEFINED_COLUMN = "predefinedlabel"
CANONICAL_HEADER = ("subject_id", "session_id", "frame_index") + BAND_NAMES + ("gender", "age", "label")


class ClassLabel(IntEnum):
    ENGAGED = 0
    CONFUSED = 1
    RELAXED = 2

    @property
    def display(self) -> str:
        return self.name.lower()


CLASS_NAMES = tuple(c.display for c in ClassLabel)


@dataclass(frozen=True)
class LabeledDataset:
    """Column-oriented rows with labels and per-row provenance.

    ``X`` is ``(n, 11)`` for frame data or ``(n, width, 11)`` for window maps;
    for windows ``frame_index`` holds the start frame.
    """

    X: np.ndarray
    y: np.ndarray
    subject: np.ndarray
    session: np.ndarray
    frame_index: np.ndarray
    provenance: np.ndarray

    def __post_init__(self):
        n = len(self.y)
        for name in ("X", "subject", "session", "frame_index", "provenance"):
            if len(getattr(self, name)) != n:
                raise ParameterError(f"column {name} has {len(getattr(self, name))} rows, expected {n}")
        if self.X.shape[-1] != N_FEATURES or self.X.ndim not in (2, 3):
            raise ParameterError(f"X must be (n, {N_FEATURES}) or (n, width, {N_FEATURES}), got {self.X.shape}")
        if n and (self.y.min() < 0 or self.y.max() >= N_CLASSES):
            raise DataError("labels must lie in {0, 1, 2}")

    def __len__(self) -> int:
        return len(self.y)

    @property
    def mode(self) -> str:
        return "window" if self.X.ndim == 3 else "frame"

    @property
    def class_counts(self) -> tuple[int, int, int]:
        return tuple(int(c) for c in np.bincount(self.y, minlength=N_CLASSES))

    def subset(self, idx) -> "LabeledDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(
            self.X[idx], self.y[idx], self.subject[idx], self.session[idx],
            self.frame_index[idx], self.provenance[idx],
        )

    @classmethod
    def empty(cls, mode: str = "frame", width: int = WINDOW_WIDTH) -> "LabeledDataset":
        shape = (0, N_FEATURES) if mode == "frame" else (0, width, N_FEATURES)
        text = np.array([], dtype=object)
        return cls(np.zeros(shape), np.zeros(0, dtype=np.int64), text, text.copy(),
                   np.zeros(0, dtype=np.int64), text.copy())

    @classmethod
    def from_arrays(cls, X, y, subject=None, session=None, frame_index=None, provenance="synthetic"):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        n = len(y)
        subject = np.asarray(["0"] * n if subject is None else subject, dtype=object)
        session = subject.copy() if session is None else np.asarray(session, dtype=object)
        frame_index = np.arange(n) if frame_index is None else np.asarray(frame_index, dtype=np.int64)
        if isinstance(provenance, str):
            provenance = [provenance] * n
        return cls(X, y, subject, session, frame_index, np.asarray(provenance, dtype=object))


def concat(parts) -> LabeledDataset:
    parts = [p for p in parts if len(p)]
    if not parts:
        return LabeledDataset.empty()
    return LabeledDataset(*(np.concatenate([getattr(p, f) for p in parts]) for f in
                            ("X", "y", "subject", "session", "frame_index", "provenance")))


def normalize_id(value) -> str:
    """Canonical subject id: ``"3.0"`` and ``"3"`` both become ``"3"``."""
    text = str(value).strip()
    try:
        number = float(text)
    except ValueError:
        return text
    return str(int(number)) if number.is_integer() else text


def _find(header: list[str], candidates) -> str | None:
    lowered = {h.lower(): h for h in header}
    for c in candidates:
        if c.lower() in lowered:
            return lowered[c.lower()]
    return None


def load_demographics(path) -> dict[str, Demographics]:
    """Read ``subject_id,gender,age``."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [h.strip() for h in reader.fieldnames or []]
        reader.fieldnames = header
        cols = {}
        for name, cands in (("subject_id", SUBJECT_COLUMNS), ("gender", ("gender",)), ("age", ("age",))):
            col = _find(header, cands)
            if col is None:
                raise SchemaError(name)
            cols[name] = col
        out = {}
        for row in reader:
            try:
                out[normalize_id(row[cols["subject_id"]])] = Demographics(row[cols["gender"]], float(row[cols["age"]]))
            except (ValueError, TypeError) as exc:
                raise DataError(f"{path} line {reader.line_num}: {exc}")
    return out


def load_band_csv(path, demographics_path=None, label_column: str | None = None) -> LabeledDataset:
    """Load pre-binned band powers, one frame per CSV line.

    The label is read from a 3-class ``label`` column if present, otherwise
    from a binary confusion column (self-reported by default; pass
    ``label_column="predefinedlabel"`` for the designed difficulty). A binary
    1 maps to Confused and 0 to Engaged. Demographics come from inline
    ``gender``/``age`` columns or from ``demographics_path``.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FormatError(f"{path}: empty file, a header row is required")
        header = [h.strip() for h in reader.fieldnames]
        reader.fieldnames = header
        rows = list(reader)

    subject_col = _find(header, SUBJECT_COLUMNS)
    if subject_col is None:
        raise SchemaError("subject_id")
    band_cols = []
    for band in BAND_NAMES:
        col = _find(header, (band,))
        if col is None:
            raise SchemaError(band)
        band_cols.append(col)
    if label_column is None:
        label_col = _find(header, ("label",)) or _find(header, CONFUSION_COLUMNS)
        if label_col is None:
            raise SchemaError(CONFUSION_COLUMNS[0])
    else:
        label_col = _find(header, (label_column,))
        if label_col is None:
            raise SchemaError(label_column)
    three_class = label_col.lower() == "label"
    session_col = _find(header, SESSION_COLUMNS)
    frame_col = _find(header, FRAME_COLUMNS)
    gender_col, age_col = _find(header, ("gender",)), _find(header, ("age",))
    inline_demo = gender_col is not None and age_col is not None
    demographics = None
    if not inline_demo:
        if demographics_path is None:
            raise SchemaError("gender", "no gender/age columns and no demographics file given")
        demographics = load_demographics(demographics_path)

    n = len(rows)
    X = np.zeros((n, N_FEATURES))
    y = np.zeros(n, dtype=np.int64)
    subject = np.empty(n, dtype=object)
    session = np.empty(n, dtype=object)
    frame_index = np.zeros(n, dtype=np.int64)
    counters: dict[tuple, int] = {}
    unknown = set()
    for i, row in enumerate(rows):
        line = i + 2
        sid = normalize_id(row[subject_col])
        subject[i] = sid
        session[i] = normalize_id(row[session_col]) if session_col else sid
        try:
            X[i, :8] = [float(row[c]) for c in band_cols]
            raw_label = float(row[label_col])
            if frame_col:
                frame_index[i] = int(float(row[frame_col]))
            else:
                key = (sid, session[i])
                frame_index[i] = counters.get(key, 0)
                counters[key] = frame_index[i] + 1
            if inline_demo:
                demo = Demographics(row[gender_col], float(row[age_col]))
            elif sid in demographics:
                demo = demographics[sid]
            else:
                unknown.add(sid)
                continue
        except (TypeError, ValueError) as exc:
            raise DataError(f"{path} line {line}: {exc}")
        if not np.all(np.isfinite(X[i, :8])):
            raise DataError(f"{path} line {line}: non-finite band power")
        X[i, 8:] = demo.vector
        if three_class:
            if raw_label not in (0, 1, 2):
                raise DataError(f"{path} line {line}: label must be 0, 1 or 2, got {row[label_col]!r}")
            y[i] = int(raw_label)
        else:
            if raw_label not in (0, 1):
                raise DataError(f"{path} line {line}: binary label must be 0 or 1, got {row[label_col]!r}")
            y[i] = ClassLabel.CONFUSED if raw_label == 1 else ClassLabel.ENGAGED
    if unknown:
        raise DataError(f"subjects missing from demographics: {', '.join(sorted(unknown))}")
    provenance = np.full(n, "band-csv", dtype=object)
    return LabeledDataset(X, y, subject, session, frame_index, provenance)


def write_band_csv(path, ds: LabeledDataset) -> None:
    """Write frame rows in the canonical schema (3-class ``label`` column)."""
    if ds.mode != "frame":
        raise ParameterError("only frame datasets can be written as band CSV")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CANONICAL_HEADER)
        for i in range(len(ds)):
            x = ds.X[i]
            gender = "female" if x[8] == 1 else "male"
            writer.writerow(
                [ds.subject[i], ds.session[i], int(ds.frame_index[i])]
                + [repr(float(v)) for v in x[:8]]
                + [gender, repr(float(x[10])), int(ds.y[i])]
            )


def read_meta(path) -> dict[str, str]:
    meta = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            key, sep, value = line.partition("=")
            if not sep:
                raise FormatError(f"{path}: expected key=value, got {raw!r}")
            meta[key.strip().lower()] = value.strip()
    return meta


def load_raw_sessions(
    directory,
    channel: str = "A1",
    expert_only: bool = True,
    bands: BandTable = DEFAULT_BANDS,
    cutoff_hz: float = 0.5,
) -> LabeledDataset:
    """Band-power frames from raw recordings, every frame labeled Relaxed.

    Layout: ``<directory>/<subject>/<channel>.txt`` plus
    ``<directory>/<subject>/meta.txt`` with gender, age and expertise.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"raw session directory not found: {directory}")
    subjects = sorted(p for p in directory.iterdir() if p.is_dir())
    if not subjects:
        log.warning("no sessions found under %s", directory)
        return LabeledDataset.empty()
    parts = []
    for subject_dir in subjects:
        meta_path = subject_dir / "meta.txt"
        if not meta_path.is_file():
            raise DataError(f"{subject_dir}: missing meta.txt")
        meta = read_meta(meta_path)
        for key in ("gender", "age", "expertise"):
            if key not in meta:
                raise DataError(f"{meta_path}: missing {key!r}")
        if expert_only and meta["expertise"].lower() != "expert":
            log.info("skipping non-expert session %s", subject_dir.name)
            continue
        try:
            demo = Demographics(meta["gender"], float(meta["age"]))
        except ValueError as exc:
            raise DataError(f"{meta_path}: {exc}")
        channel_path = subject_dir / f"{channel}.txt"
        if not channel_path.is_file():
            raise DataError(f"{subject_dir}: channel {channel!r} not found")
        segment = high_pass(read_channel_file(channel_path, channel), cutoff_hz)
        frames = [assemble(bp, demo, subject_dir.name) for bp in frame_band_powers(segment, bands)]
        n = len(frames)
        if n == 0:
            continue
        sid = normalize_id(subject_dir.name)
        parts.append(LabeledDataset.from_arrays(
            np.stack([f.values for f in frames]),
            np.full(n, ClassLabel.RELAXED),
            subject=[sid] * n,
            frame_index=[f.frame_index for f in frames],
            provenance="raw-session",
        ))
    return concat(parts)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 42
    by_subject: bool = False

    def __post_init__(self):
        if not (0 < self.train_fraction < 1):
            raise ParameterError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


MIN_SPLIT_ROWS = 5


def split_indices(n: int, spec: SplitSpec, subject=None) -> tuple[np.ndarray, np.ndarray]:
    if n < MIN_SPLIT_ROWS:
        raise ParameterError(f"need at least {MIN_SPLIT_ROWS} rows to split, got {n}")
    rng = np.random.default_rng(spec.seed)
    n_train = int(np.floor(spec.train_fraction * n + 0.5))
    if spec.by_subject:
        subjects, inverse = np.unique(np.asarray(subject, dtype=str), return_inverse=True)
        order = rng.permutation(len(subjects))
        sizes = np.bincount(inverse)[order]
        # smallest prefix of shuffled subjects reaching the target row count
        k = int(np.searchsorted(np.cumsum(sizes), n_train)) + 1
        k = min(max(k, 1), len(subjects) - 1) if len(subjects) > 1 else 1
        in_train = np.isin(inverse, order[:k])
        perm = rng.permutation(n)
        train, test = perm[in_train[perm]], perm[~in_train[perm]]
    else:
        perm = rng.permutation(n)
        train, test = perm[:n_train], perm[n_train:]
    if len(train) == 0 or len(test) == 0:
        raise ParameterError(f"split of {n} rows at fraction {spec.train_fraction} leaves one side empty")
    return train, test


def split(ds: LabeledDataset, spec: SplitSpec = SplitSpec()) -> tuple[LabeledDataset, LabeledDataset]:
    train, test = split_indices(len(ds), spec, ds.subject)
    return ds.subset(train), ds.subset(test)


def session_runs(ds: LabeledDataset):
    """Row index arrays of maximal consecutive-frame runs within one subject-session."""
    keys = list(zip(ds.subject, ds.session))
    groups: dict[tuple, list[int]] = {}
    for i, key in enumerate(keys):
        groups.setdefault(key, []).append(i)
    for idx in groups.values():
        idx = np.asarray(idx)
        idx = idx[np.argsort(ds.frame_index[idx], kind="stable")]
        breaks = np.nonzero(np.diff(ds.frame_index[idx]) != 1)[0] + 1
        yield from np.split(idx, breaks)


def to_windows(ds: LabeledDataset, width: int = WINDOW_WIDTH, stride: int = WINDOW_STRIDE) -> LabeledDataset:
    """Window maps over each session's consecutive frames; no window crosses a session."""
    if ds.mode != "frame":
        raise ParameterError("dataset is already windowed")
    parts = []
    for run in session_runs(ds):
        block = window_array(ds.X[run], width, stride)
        if not len(block):
            continue
        starts = np.arange(0, len(run) - width + 1, stride)
        labels = [window_label(ds.y[run[s : s + width]]) for s in starts]
        first = run[starts]
        parts.append(LabeledDataset(
            block, np.asarray(labels, dtype=np.int64), ds.subject[first], ds.session[first],
            ds.frame_index[first], ds.provenance[first],
        ))
    if not parts:
        return LabeledDataset.empty("window", width)
    return concat(parts)

"""11-dimensional frame features, z-score normalization and sliding windows."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .signal import BAND_NAMES, BandPowers

N_FEATURES = 11
WINDOW_WIDTH = 20
WINDOW_STRIDE = 11
FEATURE_NAMES = BAND_NAMES + ("gender_f", "gender_m", "age")
N_CLASSES = 3


@dataclass(frozen=True)
class Demographics:
    gender: str
    age: float

    def __post_init__(self):
        gender = parse_gender(self.gender)
        if not np.isfinite(self.age) or self.age <= 0:
            raise ParameterError(f"age must be positive, got {self.age}")
        object.__setattr__(self, "gender", gender)
        object.__setattr__(self, "age", float(self.age))

    @property
    def vector(self) -> np.ndarray:
        """``[gender_f, gender_m, age]``."""
        female = self.gender == "female"
        return np.array([float(female), float(not female), self.age])


def parse_gender(value: str) -> str:
    v = str(value).strip().lower()
    if v in ("f", "female", "woman"):
        return "female"
    if v in ("m", "male", "man"):
        return "male"
    raise ParameterError(f"gender must be female or male, got {value!r}")


@dataclass(frozen=True)
class FrameFeatures:
    values: np.ndarray
    subject_id: str = ""
    frame_index: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (N_FEATURES,):
            raise ParameterError(f"frame features must have {N_FEATURES} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ParameterError("frame features must be finite")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class WindowMap:
    values: np.ndarray
    start_frame: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != N_FEATURES:
            raise ParameterError(f"window map must be (frames, {N_FEATURES}), got {values.shape}")
        object.__setattr__(self, "values", values)


def assemble(bands: BandPowers, demo: Demographics, subject_id: str = "") -> FrameFeatures:
    return FrameFeatures(np.concatenate([bands.values, demo.vector]), subject_id, bands.frame_index)


@dataclass(frozen=True)
class NormalizationStats:
    """Per-dimension z-score parameters fitted on training rows only.

    Dimensions with zero variance get ``std = 1`` and ``flagged = True``.
    """

    mean: np.ndarray
    std: np.ndarray
    flagged: np.ndarray

    def normalize(self, x: np.ndarray) -> np.ndarray:
        return (np.asarray(x, dtype=np.float64) - self.mean) / self.std

    def denormalize(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z, dtype=np.float64) * self.std + self.mean

    @classmethod
    def identity(cls, dim: int = N_FEATURES) -> "NormalizationStats":
        return cls(np.zeros(dim), np.ones(dim), np.zeros(dim, dtype=bool))


def fit_normalizer(train) -> NormalizationStats:
    """Fit on a sequence of FrameFeatures or any array whose last axis is features."""
    if isinstance(train, np.ndarray):
        rows = train
    else:
        rows = [f.values if isinstance(f, FrameFeatures) else f for f in train]
        if not rows:
            raise ParameterError("cannot fit a normalizer on empty training data")
        rows = np.asarray(rows, dtype=np.float64)
    rows = rows.reshape(-1, rows.shape[-1])
    if rows.shape[0] == 0:
        raise ParameterError("cannot fit a normalizer on empty training data")
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    # a constant column can still show a rounding-level std
    flagged = ~(std > 64 * np.finfo(np.float64).eps * np.abs(mean))
    flagged |= std == 0
    std = np.where(flagged, 1.0, std)
    return NormalizationStats(mean, std, flagged)


def window_starts(n: int, width: int = WINDOW_WIDTH, stride: int = WINDOW_STRIDE) -> range:
    if width <= 0 or stride <= 0:
        raise ParameterError("width and stride must be positive")
    return range(0, n - width + 1, stride) if n >= width else range(0)


def window_array(frames: np.ndarray, width: int = WINDOW_WIDTH, stride: int = WINDOW_STRIDE) -> np.ndarray:
    """Stack sliding windows of one session's ``(n, 11)`` frame array."""
    starts = window_starts(len(frames), width, stride)
    if not starts:
        return np.zeros((0, width, frames.shape[1]))
    return np.stack([frames[s : s + width] for s in starts])


def windows(frames, width: int = WINDOW_WIDTH, stride: int = WINDOW_STRIDE) -> list[WindowMap]:
    """Sliding windows over frames of a single subject-session, in frame order."""
    frames = list(frames)
    if not frames:
        return []
    matrix = np.stack([f.values for f in frames])
    first = frames[0].frame_index
    return [WindowMap(matrix[s : s + width], first + s) for s in window_starts(len(frames), width, stride)]


def window_label(labels) -> int:
    """Majority label; ties go to the lowest class index."""
    counts = np.bincount(np.asarray(labels, dtype=np.int64), minlength=N_CLASSES)
    return int(np.argmax(counts))

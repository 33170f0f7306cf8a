"""Seeded synthetic fixtures: Gaussian blobs and raw-session directories."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .dataset import LabeledDataset, concat
from .features import N_CLASSES, N_FEATURES
from .signal import RawSegment, write_channel_file


def blob_centers(distance: float = 5.0, dim: int = N_FEATURES, n_classes: int = N_CLASSES, offset: int = 0):
    """Class centers on scaled unit axes, pairwise ``distance`` apart."""
    centers = np.zeros((n_classes, dim))
    for k in range(n_classes):
        centers[k, offset + k] = distance / np.sqrt(2.0)
    return centers


def make_blobs(n: int = 300, sigma: float = 0.1, distance: float = 5.0, seed: int = 42):
    """``(X, y)``: ``n`` frames, balanced round-robin labels, isotropic noise."""
    rng = np.random.default_rng(seed)
    y = np.arange(n) % N_CLASSES
    rng.shuffle(y)
    X = blob_centers(distance)[y] + sigma * rng.standard_normal((n, N_FEATURES))
    return X, y


def make_blob_windows(n: int = 300, width: int = 20, sigma: float = 0.1, distance: float = 5.0, seed: int = 42):
    """``(W, y)``: windows whose rows are all drawn from the window's class blob."""
    rng = np.random.default_rng(seed)
    y = np.arange(n) % N_CLASSES
    rng.shuffle(y)
    W = blob_centers(distance)[y][:, None, :] + sigma * rng.standard_normal((n, width, N_FEATURES))
    return W, y


def make_blob_sessions(sessions_per_class: int = 10, frames_per_session: int = 50, sigma: float = 0.1,
                       distance: float = 5.0, seed: int = 42) -> LabeledDataset:
    """Frame dataset of single-class sessions with blob band powers and per-subject demographics.

    Band columns hold the blobs (shifted to be positive); each session is its
    own subject with a random gender and age.
    """
    rng = np.random.default_rng(seed)
    centers = blob_centers(distance, dim=8) + 1.0
    parts = []
    sid = 0
    for k in range(N_CLASSES):
        for _ in range(sessions_per_class):
            sid += 1
            X = np.zeros((frames_per_session, N_FEATURES))
            X[:, :8] = centers[k] + sigma * rng.standard_normal((frames_per_session, 8))
            female = rng.random() < 0.5
            X[:, 8], X[:, 9] = float(female), float(not female)
            X[:, 10] = float(rng.integers(18, 40))
            parts.append(LabeledDataset.from_arrays(
                X, np.full(frames_per_session, k), subject=[str(sid)] * frames_per_session,
                provenance="band-csv",
            ))
    return concat(parts)


def sinusoid(freq_hz: float, duration_s: float, sample_rate: int = 2048, amplitude: float = 1.0,
             offset: float = 0.0, phase: float = 0.0) -> np.ndarray:
    t = np.arange(int(round(duration_s * sample_rate))) / sample_rate
    return offset + amplitude * np.sin(2 * np.pi * freq_hz * t + phase)


def write_raw_session(root, subject: str, duration_s: float = 10.0, sample_rate: int = 2048,
                      gender: str = "female", age: float = 30, expertise: str = "expert",
                      channels=("A1",), seed: int = 0) -> Path:
    """One subject directory with channel files (alpha tone + DC + noise) and meta.txt."""
    rng = np.random.default_rng(seed)
    sub = Path(root) / subject
    sub.mkdir(parents=True, exist_ok=True)
    for ch in channels:
        x = sinusoid(10.0, duration_s, sample_rate, 20.0, offset=40.0)
        x += sinusoid(6.0, duration_s, sample_rate, 8.0) + rng.standard_normal(x.size)
        write_channel_file(sub / f"{ch}.txt", RawSegment(x, sample_rate, ch))
    (sub / "meta.txt").write_text(f"gender={gender}\nage={age}\nexpertise={expertise}\n", encoding="utf-8")
    return sub

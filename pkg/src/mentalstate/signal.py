"""DC removal and per-frame band power extraction for single-channel EEG.

A frame is 0.5 s of signal. Each frame yields eight band powers (µV²) from a
one-sided periodogram; a bin contributes to a band when its center frequency
lies inside the band's closed interval, and bins falling between bands are
dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter, lfilter_zi

from .errors import DataError, FormatError, ParameterError

BAND_NAMES = ("Delta", "Theta", "Alpha1", "Alpha2", "Beta1", "Beta2", "Gamma1", "Gamma2")
FRAMES_PER_SECOND = 2


@dataclass(frozen=True)
class RawSegment:
    samples: np.ndarray
    sample_rate: int
    channel_id: str = ""

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ParameterError("samples must be a non-empty 1-D sequence")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ParameterError(f"sample_rate must be a positive integer, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class BandTable:
    """Eight named frequency bands, ``(low_hz, high_hz)`` each, ascending."""

    bounds: tuple[tuple[float, float], ...]
    names: tuple[str, ...] = BAND_NAMES

    def __post_init__(self):
        if len(self.names) != 8 or len(self.bounds) != 8:
            raise ParameterError("a band table needs exactly 8 bands")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        for name, (lo, hi) in zip(self.names, bounds):
            if not (0 <= lo < hi):
                raise ParameterError(f"band {name}: need 0 <= low < high, got {lo}:{hi}")
        for (lo0, hi0), (lo1, _), name in zip(bounds, bounds[1:], self.names[1:]):
            if lo1 <= hi0 or lo1 <= lo0:
                raise ParameterError(f"band {name} overlaps or is out of order")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def parse(cls, text: str) -> "BandTable":
        """Parse ``name=low:high`` lines (case-insensitive names, ``#`` comments)."""
        found = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                key, value = (s.strip() for s in line.split("=", 1))
                lo, hi = (float(v) for v in value.split(":"))
            except ValueError:
                raise FormatError(f"band table line {lineno}: expected name=low:high, got {raw!r}")
            found[key.lower()] = (lo, hi)
        missing = [n for n in BAND_NAMES if n.lower() not in found]
        if missing:
            raise ParameterError(f"band table is missing bands: {', '.join(missing)}")
        extra = sorted(set(found) - {n.lower() for n in BAND_NAMES})
        if extra:
            raise ParameterError(f"band table has unknown bands: {', '.join(extra)}")
        return cls(tuple(found[n.lower()] for n in BAND_NAMES))

    @classmethod
    def from_file(cls, path) -> "BandTable":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def to_text(self) -> str:
        return "".join(f"{n.lower()}={lo:g}:{hi:g}\n" for n, (lo, hi) in zip(self.names, self.bounds))


DEFAULT_BANDS = BandTable(
    (
        (0.5, 2.75),
        (3.5, 6.75),
        (7.5, 9.25),
        (10.0, 11.75),
        (13.0, 16.75),
        (18.0, 29.75),
        (31.0, 39.75),
        (41.0, 49.75),
    )
)


@dataclass(frozen=True)
class BandPowers:
    values: np.ndarray
    frame_index: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (8,):
            raise ParameterError(f"expected 8 band powers, got shape {values.shape}")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DataError("band powers must be finite and non-negative")
        object.__setattr__(self, "values", values)


def high_pass(segment: RawSegment, cutoff_hz: float = 0.5) -> RawSegment:
    """First-order single-pole high-pass filter.

    The filter state starts at steady state for the first sample, so a
    constant input produces an all-zero output instead of a decaying step.
    """
    fs = segment.sample_rate
    if not (0 < cutoff_hz < fs / 2):
        raise ParameterError(f"cutoff_hz must lie in (0, {fs / 2}), got {cutoff_hz}")
    b, a = high_pass_coefficients(cutoff_hz, fs)
    zi = lfilter_zi(b, a) * segment.samples[0]
    out, _ = lfilter(b, a, segment.samples, zi=zi)
    return RawSegment(out, fs, segment.channel_id)


def high_pass_coefficients(cutoff_hz: float, sample_rate: int) -> tuple[np.ndarray, np.ndarray]:
    # y[n] = k * (y[n-1] + x[n] - x[n-1]),  k = RC / (RC + dt)
    rc = 1.0 / (2.0 * np.pi * cutoff_hz)
    k = rc / (rc + 1.0 / sample_rate)
    return np.array([k, -k]), np.array([1.0, -k])


def frame_bounds(n_samples: int, sample_rate: int) -> list[tuple[int, int]]:
    """Sample ranges ``[start, stop)`` of every complete 0.5 s frame."""
    n_frames = (FRAMES_PER_SECOND * n_samples) // sample_rate
    return [
        ((k * sample_rate) // FRAMES_PER_SECOND, ((k + 1) * sample_rate) // FRAMES_PER_SECOND)
        for k in range(n_frames)
    ]


def periodogram(frame: np.ndarray, sample_rate: int, taper: str = "rect") -> tuple[np.ndarray, np.ndarray]:
    """One-sided power per FFT bin; bins sum to the (tapered) mean power."""
    n = frame.size
    if taper == "rect":
        w = np.ones(n)
    elif taper == "hann":
        w = np.hanning(n)
    else:
        raise ParameterError(f"unknown taper {taper!r}")
    spec = np.fft.rfft(frame * w)
    power = np.abs(spec) ** 2 / (n * np.dot(w, w))
    if n % 2 == 0:
        power[1:-1] *= 2
    else:
        power[1:] *= 2
    return np.fft.rfftfreq(n, 1.0 / sample_rate), power


def band_power_matrix(
    samples: np.ndarray, sample_rate: int, bands: BandTable = DEFAULT_BANDS, taper: str = "rect"
) -> np.ndarray:
    """Band powers of every frame as an ``(n_frames, 8)`` array."""
    samples = np.asarray(samples, dtype=np.float64)
    if not np.all(np.isfinite(samples)):
        raise DataError("segment contains non-finite samples")
    spans = frame_bounds(samples.size, sample_rate)
    out = np.zeros((len(spans), 8))
    masks = {}
    for k, (start, stop) in enumerate(spans):
        freqs, power = periodogram(samples[start:stop], sample_rate, taper)
        key = stop - start
        if key not in masks:
            masks[key] = [(freqs >= lo) & (freqs <= hi) for lo, hi in bands.bounds]
        for b, mask in enumerate(masks[key]):
            out[k, b] = power[mask].sum()
    return out


def frame_band_powers(segment: RawSegment, bands: BandTable = DEFAULT_BANDS, taper: str = "rect") -> list[BandPowers]:
    matrix = band_power_matrix(segment.samples, segment.sample_rate, bands, taper)
    return [BandPowers(row, k) for k, row in enumerate(matrix)]


def read_channel_file(path, channel_id: str | None = None) -> RawSegment:
    """Read ``sample_rate=<int>`` followed by one voltage per line."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
        key, _, value = header.partition("=")
        if key.strip() != "sample_rate" or not value.strip().isdigit():
            raise FormatError(f"{path}: first line must be 'sample_rate=<int>', got {header!r}")
        try:
            samples = np.loadtxt(fh, dtype=np.float64, ndmin=1)
        except ValueError as exc:
            raise DataError(f"{path}: unreadable sample value ({exc})")
    if samples.size == 0:
        raise DataError(f"{path}: channel file has no samples")
    return RawSegment(samples, int(value), channel_id or path.stem)


def write_channel_file(path, segment: RawSegment) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"sample_rate={segment.sample_rate}\n")
        fh.writelines(f"{v!r}\n" for v in segment.samples.tolist())

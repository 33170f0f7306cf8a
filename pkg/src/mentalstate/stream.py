"""Online classification over a stream of 2 Hz band-power frames.

A session keeps the newest ``width`` frames in a ring buffer. Once the buffer
is full, a decision is emitted every ``emit_stride`` frames: window models see
the buffered window in time order, frame models see only the newest frame.
"""
from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass

import numpy as np

from .dataset import CLASS_NAMES
from .errors import ParameterError
from .features import N_FEATURES, WINDOW_WIDTH, FrameFeatures

FRAME_RATE_HZ = 2.0


@dataclass(frozen=True)
class StateDecision:
    label: int
    scores: np.ndarray
    frame_index: int
    latency: float

    def to_json(self) -> str:
        return json.dumps({
            "frame": int(self.frame_index),
            "label": CLASS_NAMES[self.label],
            "scores": [float(s) for s in self.scores],
            "latency_s": float(self.latency),
        })


class StreamSession:
    def __init__(self, model, emit_stride: int = 1, on_decision=None, width: int | None = None):
        if emit_stride < 1:
            raise ParameterError("emit_stride must be at least 1")
        self.model = model
        self.width = width or (model.window_width if model.input_mode == "window" else WINDOW_WIDTH)
        self.emit_stride = emit_stride
        self.on_decision = on_decision
        self._buffer = np.zeros((self.width, N_FEATURES))
        self._head = 0
        self.frames_seen = 0
        self._lock = threading.Lock()

    def reset(self) -> None:
        with self._lock:
            self._buffer[:] = 0.0
            self._head = 0
            self.frames_seen = 0

    def window(self) -> np.ndarray:
        """Buffered frames, oldest first (only meaningful once full)."""
        return np.concatenate([self._buffer[self._head :], self._buffer[: self._head]])

    def push_frame(self, frame) -> StateDecision | None:
        if isinstance(frame, FrameFeatures):
            values, index = frame.values, frame.frame_index
        else:
            values, index = np.asarray(frame, dtype=np.float64), None
        if values.shape != (N_FEATURES,):
            raise ParameterError(f"frame must have {N_FEATURES} values, got shape {values.shape}")
        with self._lock:
            self._buffer[self._head] = values
            self._head = (self._head + 1) % self.width
            self.frames_seen += 1
            if index is None:
                index = self.frames_seen - 1
            if self.frames_seen < self.width or (self.frames_seen - self.width) % self.emit_stride:
                return None
            t0 = time.perf_counter_ns()
            x = self.window() if self.model.input_mode == "window" else self._buffer[self._head - 1]
            scores = self.model.predict_scores(x)[0]
            latency = max(time.perf_counter_ns() - t0, 1) * 1e-9
            decision = StateDecision(int(np.argmax(scores)), scores, int(index), latency)
            if self.on_decision is not None:
                self.on_decision(decision)
            return decision


def _frames(rows):
    if hasattr(rows, "X") and hasattr(rows, "frame_index"):
        if rows.mode != "frame":
            raise ParameterError("replay needs frame rows, not windows")
        return (FrameFeatures(x, s, int(i)) for x, s, i in zip(rows.X, rows.subject, rows.frame_index))
    return iter(rows)


def replay(session: StreamSession, rows, rate: float | None = None) -> list[StateDecision]:
    """Feed rows through ``push_frame``; ``rate`` (frames/s) throttles to real time, ``None`` runs flat out."""
    if rate is not None and rate <= 0:
        raise ParameterError("rate must be positive")
    out = []
    start = time.perf_counter()
    for i, frame in enumerate(_frames(rows)):
        if rate is not None:
            delay = start + i / rate - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
        decision = session.push_frame(frame)
        if decision is not None:
            out.append(decision)
    return out

"""Accuracy, normal-approximation confidence intervals, timing and the accuracy-per-second metric."""
from __future__ import annotations

import csv
import json
import math
import statistics
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .features import N_CLASSES

Z_95 = 1.96
CSV_FIELDS = ("model", "accuracy", "ci", "eval_seconds", "potential", "n_test", "seed")
_CLOCK_RESOLUTION = time.get_clock_info("perf_counter").resolution


def accuracy(predictions, labels) -> float:
    predictions, labels = np.asarray(predictions), np.asarray(labels)
    if predictions.shape != labels.shape:
        raise ParameterError(f"length mismatch: {predictions.shape} predictions vs {labels.shape} labels")
    if predictions.size == 0:
        raise ParameterError("accuracy of an empty set is undefined")
    return float(np.mean(predictions == labels))


def confidence_interval(acc: float, n: int, z: float = Z_95) -> float:
    """Half-width ``z * sqrt(acc * (1 - acc) / n)``."""
    if n < 1:
        raise ParameterError(f"n must be at least 1, got {n}")
    if not (0.0 <= acc <= 1.0):
        raise ParameterError(f"accuracy must lie in [0, 1], got {acc}")
    return z * math.sqrt(acc * (1.0 - acc) / n)


def potential(acc: float, seconds: float) -> float:
    """Accuracy (as a fraction) per second of evaluation time."""
    if not seconds > 0:
        raise ParameterError(f"evaluation time must be positive, got {seconds}")
    return acc / seconds


def confusion_matrix(predictions, labels, n_classes: int = N_CLASSES) -> np.ndarray:
    out = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(out, (np.asarray(labels, dtype=np.int64), np.asarray(predictions, dtype=np.int64)), 1)
    return out


@dataclass
class ModelResult:
    model: str
    accuracy: float
    ci: float
    eval_seconds: float
    potential: float
    n_test: int
    seed: int
    is_baseline: bool = False
    # 0 for the random baseline, which by convention has no practical potential
    nominal_potential: float = 0.0
    confusion: list[list[int]] = field(default_factory=list)

    @classmethod
    def build(cls, name: str, predictions, labels, eval_seconds: float, seed: int, is_baseline: bool = False):
        acc = accuracy(predictions, labels)
        pot = potential(acc, eval_seconds)
        return cls(
            model=name, accuracy=acc, ci=confidence_interval(acc, len(labels)), eval_seconds=eval_seconds,
            potential=pot, n_test=len(labels), seed=seed, is_baseline=is_baseline,
            nominal_potential=0.0 if is_baseline else pot,
            confusion=confusion_matrix(predictions, labels).tolist(),
        )


@dataclass
class EvalReport:
    results: list[ModelResult]

    def __getitem__(self, name: str) -> ModelResult:
        for r in self.results:
            if r.model == name:
                return r
        raise KeyError(name)

    def __len__(self):
        return len(self.results)

    @property
    def mean_ci(self) -> float:
        trained = [r.ci for r in self.results if not r.is_baseline]
        return float(np.mean(trained)) if trained else float("nan")


def time_passes(fn, repeats: int = 5, warmup: int = 1) -> tuple[float, object]:
    """Median wall-clock seconds of ``fn()`` over ``repeats`` calls, after warm-up."""
    if repeats < 1:
        raise ParameterError("repeats must be at least 1")
    out = None
    for _ in range(warmup):
        out = fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return max(statistics.median(times), _CLOCK_RESOLUTION), out


def benchmark(models: dict, test, repeats: int = 5, seed: int = 42, chunk_size: int | None = None) -> EvalReport:
    """Time full prediction passes of each model over its test set.

    ``test`` is a LabeledDataset, or a dict ``{"frame": ds, "window": ds}``
    when models with different input modes are compared.
    """
    results = []
    for name, model in models.items():
        ds = test[model.input_mode] if isinstance(test, dict) else test
        if len(ds) == 0:
            raise ParameterError(f"empty test set for model {name!r}")
        X = ds.X

        def run(model=model, X=X):
            if chunk_size is None:
                return model.predict_labels(X)
            return np.concatenate([model.predict_labels(X[s : s + chunk_size]) for s in range(0, len(X), chunk_size)])

        seconds, predictions = time_passes(run, repeats)
        results.append(ModelResult.build(name, predictions, ds.y, seconds, seed, model.kind == "random"))
    return EvalReport(results)


def _record(r: ModelResult) -> dict:
    return asdict(r)


def emit_report(report: EvalReport, path, fmt: str = "jsonl") -> Path:
    path = Path(path)
    if fmt in ("jsonl", "json-lines"):
        text = "".join(json.dumps(_record(r)) + "\n" for r in report.results)
    elif fmt == "csv":
        rows = [",".join(CSV_FIELDS)]
        for r in report.results:
            rows.append(",".join(
                repr(v) if isinstance(v, float) else str(v) for v in (getattr(r, f) for f in CSV_FIELDS)
            ))
        text = "\n".join(rows) + "\n"
    else:
        raise ParameterError(f"unknown report format {fmt!r}; expected jsonl or csv")
    path.write_text(text, encoding="utf-8")
    return path


def read_report(path) -> list[dict]:
    path = Path(path)
    if path.suffix == ".csv":
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            for key in ("accuracy", "ci", "eval_seconds", "potential"):
                row[key] = float(row[key])
            row["n_test"], row["seed"] = int(row["n_test"]), int(row["seed"])
        return rows
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line]

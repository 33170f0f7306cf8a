"""Per-kind training configurations."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from ..errors import ParameterError


@dataclass
class TrainConfig:
    seed: int = 42

    def validate(self) -> "TrainConfig":
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                continue
            if f.name in NON_NEGATIVE:
                ok = value >= 0
            elif f.name == "seed":
                ok = True
            else:
                ok = value > 0
            if not ok:
                raise ParameterError(f"{type(self).__name__}.{f.name} must be positive, got {value}")
        return self


NON_NEGATIVE = {"gamma_split", "reg_lambda", "min_child_weight"}


@dataclass
class NeuralConfig(TrainConfig):
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 0.05
    patience: int = 10
    initial_accumulator: float = 0.1


@dataclass
class MlpConfig(NeuralConfig):
    hidden: tuple[int, ...] = (450, 450)


@dataclass
class CnnConfig(NeuralConfig):
    filters: tuple[int, int] = (32, 64)
    dense: int = 32


@dataclass
class SvmConfig(TrainConfig):
    C: float = 0.5
    kernel: str = "rbf"
    gamma: float | None = None  # None: 1 / (n_features * var(X))
    tol: float = 1e-3
    decomposition: str = "ovo"
    cache_rows: int = 4096
    max_iter: int | None = None

    def validate(self):
        super().validate()
        if self.kernel not in ("rbf", "linear"):
            raise ParameterError(f"unknown kernel {self.kernel!r}")
        if self.decomposition not in ("ovo", "ovr"):
            raise ParameterError(f"unknown decomposition {self.decomposition!r}")
        return self


@dataclass
class GbtConfig(TrainConfig):
    n_rounds: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    reg_lambda: float = 1.0
    gamma_split: float = 0.0
    min_child_weight: float = 1.0


CONFIG_TYPES = {
    "svm": SvmConfig,
    "dnn": MlpConfig,
    "cnn": CnnConfig,
    "xgb": GbtConfig,
    "random": TrainConfig,
}


def default_config(kind: str, **overrides) -> TrainConfig:
    try:
        cls = CONFIG_TYPES[kind]
    except KeyError:
        raise ParameterError(f"unknown model kind {kind!r}; expected one of {sorted(CONFIG_TYPES)}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(overrides) - names)
    if unknown:
        raise ParameterError(f"{cls.__name__} has no option(s) {', '.join(unknown)}")
    return cls(**overrides).validate()


def coerce_overrides(kind: str, raw: dict[str, str]) -> dict:
    """Convert string key-value pairs (config file / CLI) to typed overrides for ``kind``.

    Keys may be prefixed ``<kind>.``; prefixed keys for other kinds are ignored.
    """
    cls = CONFIG_TYPES[kind]
    fields = {f.name: f for f in dataclasses.fields(cls)}
    defaults = cls()
    out = {}
    for key, value in raw.items():
        prefix, dot, name = key.rpartition(".")
        if dot and prefix != kind:
            continue
        if name not in fields:
            continue
        default = getattr(defaults, name)
        try:
            if value.lower() in ("none", "auto", "scale") and fields[name].default is None:
                out[name] = None
            elif isinstance(default, bool):
                out[name] = value.lower() in ("1", "true", "yes")
            elif isinstance(default, tuple):
                out[name] = tuple(int(v) for v in value.replace(",", " ").split())
            elif isinstance(default, int) or (default is None and name == "max_iter"):
                out[name] = int(value)
            elif isinstance(default, float) or default is None:
                out[name] = float(value)
            else:
                out[name] = value
        except ValueError:
            raise ParameterError(f"option {key}: cannot parse {value!r}")
    return out

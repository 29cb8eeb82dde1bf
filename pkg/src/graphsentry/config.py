"""Run configuration: YAML parsing, defaults, and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .attacks import ATTACKS
from .generators import SYNTHETIC_MODELS

DEFAULT_SYNTHETIC_SIZE = 300
DEFAULT_SYNTHETIC_CLASSES = 3
DEFAULT_BA_PARAMETER = 3.0
DEFAULT_ER_MEAN_DEGREE = 4.0
DEFAULT_N_TARGETS = 100
DEFAULT_TOP_K = 4
DEFAULT_K_VALUES = tuple(range(1, 11))
DEFAULT_OUTPUT_DIR = "runs"
# gradargmax stays opt-in: it needs degree-1 structure to flip anything, so on
# generic graphs it would produce zero successes and abort an otherwise fine run
DEFAULT_ATTACKS = ("nettack", "meta")


class ConfigError(ValueError):
    """The run configuration is malformed or inconsistent."""


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a generated input graph."""

    model: str = "erdos-renyi"
    size: int = DEFAULT_SYNTHETIC_SIZE
    parameter: float | None = None
    seed: int = 0
    classes: int = DEFAULT_SYNTHETIC_CLASSES

    def resolved_parameter(self) -> float:
        if self.parameter is not None:
            return self.parameter
        if self.model == "barabasi-albert":
            return DEFAULT_BA_PARAMETER
        return min(1.0, DEFAULT_ER_MEAN_DEGREE / max(1, self.size - 1))


@dataclass(frozen=True)
class AttackSpec:
    """One attack to run, with an optional budget override."""

    name: str
    budget: int | None = None


@dataclass(frozen=True)
class RunConfig:
    """Everything a full experiment run needs, with documented defaults."""

    dataset_edges: Path | None = None
    dataset_labels: Path | None = None
    synthetic: SyntheticSpec | None = None
    attacks: tuple[AttackSpec, ...] = tuple(AttackSpec(n) for n in DEFAULT_ATTACKS)
    n_targets: int = DEFAULT_N_TARGETS
    top_k: int = DEFAULT_TOP_K
    k_values: tuple[int, ...] = DEFAULT_K_VALUES
    sampling_seed: int = 0
    split_seed: int = 0
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)

    @property
    def dataset_name(self) -> str:
        if self.dataset_edges is not None:
            return self.dataset_edges.stem
        s = self.synthetic
        return f"{s.model}-n{s.size}-s{s.seed}"


_TOP_LEVEL_KEYS = {"dataset", "synthetic", "attacks", "n_targets", "top_k",
                   "k_values", "seeds", "output_dir"}


def _require_mapping(value, what: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(f"{what} must be a mapping, got {type(value).__name__}")
    return value


def _int_field(mapping: dict, key: str, default, what: str, minimum: int = 0):
    value = mapping.get(key, default)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"{what}.{key} must be an integer")
    if value < minimum:
        raise ConfigError(f"{what}.{key} must be >= {minimum}, got {value}")
    return value


def _parse_synthetic(raw) -> SyntheticSpec:
    raw = _require_mapping(raw, "synthetic")
    unknown = set(raw) - {"model", "size", "parameter", "seed", "classes"}
    if unknown:
        raise ConfigError(f"unknown synthetic keys: {sorted(unknown)}")
    model = raw.get("model", "erdos-renyi")
    if model not in SYNTHETIC_MODELS:
        raise ConfigError(f"synthetic.model must be one of {list(SYNTHETIC_MODELS)}, "
                          f"got {model!r}")
    parameter = raw.get("parameter")
    if parameter is not None and not isinstance(parameter, (int, float)):
        raise ConfigError("synthetic.parameter must be a number")
    return SyntheticSpec(
        model=model,
        size=_int_field(raw, "size", DEFAULT_SYNTHETIC_SIZE, "synthetic", minimum=2),
        parameter=None if parameter is None else float(parameter),
        seed=_int_field(raw, "seed", 0, "synthetic"),
        classes=_int_field(raw, "classes", DEFAULT_SYNTHETIC_CLASSES, "synthetic",
                           minimum=2),
    )


def _parse_attacks(raw) -> tuple[AttackSpec, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("attacks must be a non-empty list")
    specs = []
    for entry in raw:
        if isinstance(entry, str):
            entry = {"name": entry}
        entry = _require_mapping(entry, "attacks entry")
        unknown = set(entry) - {"name", "budget"}
        if unknown:
            raise ConfigError(f"unknown attack keys: {sorted(unknown)}")
        name = entry.get("name")
        if name not in ATTACKS:
            raise ConfigError(f"unknown attack {name!r}; choose from {sorted(ATTACKS)}")
        budget = entry.get("budget")
        if budget is not None:
            if not isinstance(budget, int) or isinstance(budget, bool) or budget < 1:
                raise ConfigError(f"attack budget must be a positive integer, "
                                  f"got {budget!r}")
        specs.append(AttackSpec(name=name, budget=budget))
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ConfigError("attacks must not repeat")
    return tuple(specs)


_FLAT_SYNTHETIC_KEYS = ("model", "size", "parameter", "classes")


def config_from_dict(raw: dict) -> RunConfig:
    """Validate a parsed config document and fill in every default."""
    raw = dict(_require_mapping(raw, "config"))
    flat = {k: raw.pop(k) for k in _FLAT_SYNTHETIC_KEYS if k in raw}
    if flat:
        if "synthetic" in raw or "dataset" in raw:
            raise ConfigError("flat synthetic keys cannot be combined with a "
                              "'synthetic' or 'dataset' section")
        raw["synthetic"] = flat
    unknown = set(raw) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    has_dataset = "dataset" in raw
    has_synthetic = "synthetic" in raw
    if has_dataset == has_synthetic:
        raise ConfigError("config needs exactly one of 'dataset' and 'synthetic'")

    edges = labels = None
    synthetic = None
    if has_dataset:
        dataset = _require_mapping(raw["dataset"], "dataset")
        unknown = set(dataset) - {"edges", "labels"}
        if unknown:
            raise ConfigError(f"unknown dataset keys: {sorted(unknown)}")
        for key in ("edges", "labels"):
            if not isinstance(dataset.get(key), str):
                raise ConfigError(f"dataset.{key} must be a path string")
        edges = Path(dataset["edges"])
        labels = Path(dataset["labels"])
    else:
        synthetic = _parse_synthetic(raw["synthetic"] or {})

    attacks = (_parse_attacks(raw["attacks"]) if "attacks" in raw
               else tuple(AttackSpec(n) for n in DEFAULT_ATTACKS))

    seeds = _require_mapping(raw.get("seeds", {}), "seeds")
    unknown = set(seeds) - {"sampling", "split"}
    if unknown:
        raise ConfigError(f"unknown seed keys: {sorted(unknown)}")

    k_raw = raw.get("k_values", list(DEFAULT_K_VALUES))
    if not isinstance(k_raw, list) or not k_raw or not all(
            isinstance(k, int) and not isinstance(k, bool) and k >= 1 for k in k_raw):
        raise ConfigError("k_values must be a non-empty list of positive integers")

    output_dir = raw.get("output_dir", DEFAULT_OUTPUT_DIR)
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir must be a path string")

    return RunConfig(
        dataset_edges=edges,
        dataset_labels=labels,
        synthetic=synthetic,
        attacks=attacks,
        n_targets=_int_field(raw, "n_targets", DEFAULT_N_TARGETS, "config", minimum=1),
        top_k=_int_field(raw, "top_k", DEFAULT_TOP_K, "config", minimum=1),
        k_values=tuple(k_raw),
        sampling_seed=_int_field(seeds, "sampling", 0, "seeds"),
        split_seed=_int_field(seeds, "split", 0, "seeds"),
        output_dir=Path(output_dir),
    )


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid config syntax in {path}: {exc}") from exc
    if raw is None:
        raise ConfigError(f"config {path} is empty")
    return config_from_dict(raw)

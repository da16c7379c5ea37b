from __future__ import annotations

from configparser import ConfigParser
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

from cpdag_discovery_tool.errors import ValidationError
from cpdag_discovery_tool.utils.keyvalue import read_key_value


THIS_FILE = Path(__file__).resolve()
THIS_DIR = THIS_FILE.parent

# Read config file
CFG_FILE = THIS_DIR / "discovery.cfg"
PARSER = ConfigParser()
PARSER.read(CFG_FILE)


def _floats(text: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in text.split(",") if item.strip())


def _ints(text: str) -> Tuple[int, ...]:
    return tuple(int(item) for item in text.split(",") if item.strip())


def _names(text: str) -> Tuple[str, ...]:
    return tuple(item.strip() for item in text.split(",") if item.strip())


# Simulation
MAX_SPARSITY = PARSER.getfloat("simulation", "max_sparsity")
BETA_BOUNDS = (PARSER.getfloat("simulation", "beta_min"),
               PARSER.getfloat("simulation", "beta_max"))
SIGMA_BOUNDS = (PARSER.getfloat("simulation", "sigma_min"),
                PARSER.getfloat("simulation", "sigma_max"))
POSITIVE_SIGN = PARSER.getfloat("simulation", "positive_sign")
SHARD_SIZE = PARSER.getint("simulation", "shard_size")

# Network
FILTERS = PARSER.getint("network", "filters")
POOL = PARSER.getint("network", "pool")
DROPOUT_RATE = PARSER.getfloat("network", "dropout_rate")
EPOCHS = PARSER.getint("network", "epochs")
BATCH_SIZE = PARSER.getint("network", "batch_size")
LEARNING_RATE = PARSER.getfloat("network", "learning_rate")
LOSS_EPSILON = PARSER.getfloat("network", "loss_epsilon")

# Sweeps
THRESHOLDS = _floats(PARSER.get("postprocess", "thresholds"))
ALPHAS = _floats(PARSER.get("pc", "alphas"))

POSTPROCESSORS = ("cutoff", "bpco")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Grid and corpus sizes of a benchmark sweep

    Every list field is swept in full: one cell per (p, n), and inside a
    cell one row per threshold and post-processor for the trained network
    and one row per alpha for PC.
    """
    p: Tuple[int, ...] = _ints(PARSER.get("benchmark", "p"))
    n: Tuple[int, ...] = _ints(PARSER.get("benchmark", "n"))
    thresholds: Tuple[float, ...] = THRESHOLDS
    alphas: Tuple[float, ...] = ALPHAS
    postprocess: Tuple[str, ...] = _names(PARSER.get("benchmark", "postprocess"))
    b_train: int = PARSER.getint("benchmark", "b_train")
    b_test: int = PARSER.getint("benchmark", "b_test")
    seed: int = PARSER.getint("benchmark", "seed")
    epochs: int = EPOCHS
    batch_size: int = BATCH_SIZE
    learning_rate: float = LEARNING_RATE
    dense_units: Optional[int] = None
    workers: int = PARSER.getint("benchmark", "workers")
    torch_threads: int = PARSER.getint("benchmark", "torch_threads")

    def __post_init__(self):
        if not self.p or min(self.p) < 3:
            raise ValidationError(f"benchmark p values must be >= 3, got {self.p}")
        if not self.n or min(self.n) < 2:
            raise ValidationError(f"benchmark n values must be >= 2, got {self.n}")
        if any(not 0 < tau < 1 for tau in self.thresholds):
            raise ValidationError(f"thresholds must lie in (0, 1), got {self.thresholds}")
        if any(not 0 < alpha < 1 for alpha in self.alphas):
            raise ValidationError(f"alphas must lie in (0, 1), got {self.alphas}")
        unknown = set(self.postprocess) - set(POSTPROCESSORS)
        if unknown:
            raise ValidationError(f"unknown post-processing methods: {sorted(unknown)}")
        if self.b_train < 1 or self.b_test < 1:
            raise ValidationError("b_train and b_test must be positive")
        if self.workers < 1 or self.torch_threads < 1:
            raise ValidationError("workers and torch_threads must be positive")


# How flat-file values become BenchmarkConfig fields
_PARSERS = {
    "p": _ints,
    "n": _ints,
    "thresholds": _floats,
    "alphas": _floats,
    "postprocess": _names,
    "b_train": int,
    "b_test": int,
    "seed": int,
    "epochs": int,
    "batch_size": int,
    "learning_rate": float,
    "dense_units": lambda text: int(text) if text.strip() else None,
    "workers": int,
    "torch_threads": int,
}


def benchmark_config(values: Optional[Dict[str, str]] = None,
                     base: Optional[BenchmarkConfig] = None) -> BenchmarkConfig:
    """Build a BenchmarkConfig from string values over a base config

    Args:
        values (Optional[Dict[str, str]], optional): Raw `key=value` strings.
            Defaults to None.
        base (Optional[BenchmarkConfig], optional): Values not given are taken
            from here. Defaults to the packaged defaults.

    Returns:
        BenchmarkConfig: The merged configuration
    """
    base = base or BenchmarkConfig()
    values = values or {}
    unknown = sorted(set(values) - set(_PARSERS))
    if unknown:
        known = ", ".join(f.name for f in fields(BenchmarkConfig))
        raise ValidationError(f"unknown config keys {unknown}; known keys: {known}")
    parsed = {}
    for key, text in values.items():
        try:
            parsed[key] = _PARSERS[key](text)
        except ValueError as err:
            raise ValidationError(f"config key {key!r}: cannot parse {text!r}") from err
    return replace(base, **parsed)


def load_benchmark_config(location: Optional[Path] = None,
                          overrides: Optional[Dict[str, str]] = None) -> BenchmarkConfig:
    """Read a flat config file and apply command-line overrides on top"""
    config = BenchmarkConfig()
    if location is not None:
        config = benchmark_config(read_key_value(location), config)
    return benchmark_config(overrides, config)

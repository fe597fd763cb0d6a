#!/usr/bin/env python
"""
File Description: Run and experiment configuration.

Config files are plain text, one ``key = value`` per line. ``#`` starts a comment, list values are comma separated,
and an empty value is an empty list. Command-line flags override file values and feed the same dataclasses.

    # protection settings
    pi = 0.5
    jump_rates = 0.01, 0.001, 0.0001
    betas = 1, 0.5, 2
"""

# ******************************************    Libraries to be imported    ****************************************** #
import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple, Union

from protclass.baselines import BASELINES
from protclass.cox import DEFAULT_ALPHA_MAGNITUDES, DEFAULT_BETAS, build_default_grid
from protclass.errors import ConfigError
from protclass.jumper import DEFAULT_JUMP_RATES, DEFAULT_PI, JumperConfig
from protclass.metrics import DEFAULT_ECE_BINS, DEFAULT_ECE_NORM, ECE_NORMS
from protclass.shift.datasets import SyntheticSpec
from protclass.shift.experiment import DEFAULT_BASELINES, DEFAULT_SEEDS
from protclass.shift.models import MODEL_KINDS
from protclass.shift.scenarios import CONCEPT_SHIFT, SCENARIO_KINDS, ShiftScenario
from protclass.streams import DEFAULT_CLAMP_EPSILON

logger = logging.getLogger(__name__)

MAX_CLAMP_EPSILON = 0.01
VARIANTS = {"standard": False, "protected": True}


def fingerprint(payload: dict) -> str:
    """sha256 of the canonical JSON dump of a plain dict."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def jumper_fingerprint(config: JumperConfig) -> str:
    return fingerprint(config.to_dict())


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class RunConfig:
    """
    Settings shared by every command.

    A grid holding only the neutral calibrator is obtained with ``betas = 1`` and an empty ``alpha_magnitudes``.
    """

    pi: float = DEFAULT_PI
    jump_rates: Tuple[float, ...] = DEFAULT_JUMP_RATES
    betas: Tuple[float, ...] = DEFAULT_BETAS
    alpha_magnitudes: Tuple[float, ...] = DEFAULT_ALPHA_MAGNITUDES
    clamp_epsilon: float = DEFAULT_CLAMP_EPSILON
    ece_bins: int = DEFAULT_ECE_BINS
    ece_norm: str = DEFAULT_ECE_NORM
    seed: int = 0

    def __post_init__(self):
        for name in ("jump_rates", "betas", "alpha_magnitudes"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if not 0.0 < self.pi < 1.0:
            raise ConfigError(f"pi must lie in (0, 1), got {self.pi}")
        if not self.jump_rates or any(not 0.0 < j < 1.0 for j in self.jump_rates):
            raise ConfigError(f"jump rates must be non-empty and lie in (0, 1), got {self.jump_rates}")
        if len(set(self.jump_rates)) != len(self.jump_rates):
            raise ConfigError(f"jump rates must be distinct, got {self.jump_rates}")
        if 1.0 not in self.betas or any(not (math.isfinite(b) and b > 0.0) for b in self.betas):
            raise ConfigError(f"betas must be positive and contain 1, got {self.betas}")
        if any(not math.isfinite(m) or m <= 0.0 for m in self.alpha_magnitudes):
            raise ConfigError(f"alpha magnitudes must be positive, got {self.alpha_magnitudes}")
        if not 0.0 < self.clamp_epsilon <= MAX_CLAMP_EPSILON:
            raise ConfigError(f"clamp_epsilon must lie in (0, {MAX_CLAMP_EPSILON}], got {self.clamp_epsilon}")
        if self.ece_bins < 1:
            raise ConfigError(f"ece_bins must be at least 1, got {self.ece_bins}")
        if self.ece_norm not in ECE_NORMS:
            raise ConfigError(f"ece_norm must be one of {ECE_NORMS}, got {self.ece_norm!r}")

    def jumper_config(self, K: int) -> JumperConfig:
        grid = build_default_grid(K, self.betas, self.alpha_magnitudes)
        return JumperConfig(grid=grid, pi=self.pi, jump_rates=self.jump_rates)

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        return fingerprint(self.to_dict())

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with every override that is not None applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


# ******************************************    Class Declaration Start     ****************************************** #
@dataclass(frozen=True)
class ExperimentConfig:
    """A battery of shift experiments: every scenario crossed with every classifier."""

    run: RunConfig = RunConfig()
    scenarios: Tuple[str, ...] = SCENARIO_KINDS
    classifiers: Tuple[str, ...] = MODEL_KINDS
    baselines: Tuple[str, ...] = DEFAULT_BASELINES
    variants: Tuple[str, ...] = tuple(VARIANTS)
    seeds: Tuple[int, ...] = DEFAULT_SEEDS
    K: int = 2
    n_features: int = 20
    n_informative: int = 5
    n_train: int = 2000
    n_test: int = 1000
    separation: float = 1.0
    affected_tail: int = 500
    permute_after: bool = True

    def __post_init__(self):
        for name in ("scenarios", "classifiers", "baselines", "variants", "seeds"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        _check_choices("scenario", self.scenarios, SCENARIO_KINDS)
        _check_choices("classifier", self.classifiers, MODEL_KINDS)
        _check_choices("baseline", self.baselines, tuple(BASELINES), allow_empty=True)
        _check_choices("variant", self.variants, tuple(VARIANTS))
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if CONCEPT_SHIFT in self.scenarios and self.K != 2:
            raise ConfigError(f"concept_shift is defined for binary labels only, got K={self.K}")
        if self.affected_tail > self.n_test:
            raise ConfigError(f"affected_tail ({self.affected_tail}) exceeds n_test ({self.n_test})")
        self.synthetic_spec(self.seeds[0])

    def synthetic_spec(self, seed: int) -> SyntheticSpec:
        return SyntheticSpec(
            n_features=self.n_features,
            n_informative=self.n_informative,
            K=self.K,
            n_train=self.n_train,
            n_test=self.n_test,
            seed=seed,
            separation=self.separation,
        )

    def scenario(self, kind: str) -> ShiftScenario:
        return ShiftScenario(kind=kind, affected_tail=self.affected_tail, permute_after=self.permute_after)

    @property
    def protection(self) -> Tuple[bool, ...]:
        return tuple(VARIANTS[v] for v in self.variants)

    def to_dict(self) -> dict:
        return asdict(self)


def _check_choices(label: str, values: Tuple[str, ...], allowed: Tuple[str, ...], allow_empty: bool = False):
    if not values and not allow_empty:
        raise ConfigError(f"at least one {label} is required")
    unknown = [v for v in values if v not in allowed]
    if unknown:
        raise ConfigError(f"unknown {label} {unknown}; choose from {list(allowed)}")


# ****************************************        Function Declaration        **************************************** #
def _split(value: str) -> list:
    return [item.strip() for item in value.split(",") if item.strip()]


def _to_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {value!r}")


_PARSERS: Dict[str, Callable[[str], object]] = {
    "pi": float,
    "jump_rates": lambda v: tuple(float(x) for x in _split(v)),
    "betas": lambda v: tuple(float(x) for x in _split(v)),
    "alpha_magnitudes": lambda v: tuple(float(x) for x in _split(v)),
    "clamp_epsilon": float,
    "ece_bins": int,
    "ece_norm": str.strip,
    "seed": int,
    "scenarios": lambda v: tuple(_split(v)),
    "classifiers": lambda v: tuple(_split(v)),
    "baselines": lambda v: tuple(_split(v)),
    "variants": lambda v: tuple(_split(v)),
    "seeds": lambda v: tuple(int(x) for x in _split(v)),
    "K": int,
    "n_features": int,
    "n_informative": int,
    "n_train": int,
    "n_test": int,
    "separation": float,
    "affected_tail": int,
    "permute_after": _to_bool,
}

RUN_KEYS = tuple(f.name for f in fields(RunConfig))
EXPERIMENT_KEYS = tuple(f.name for f in fields(ExperimentConfig) if f.name != "run")


def parse_key_values(text: str, allowed: Tuple[str, ...], source: str = "<config>") -> Dict[str, object]:
    """
    Parse ``key = value`` lines into typed values.

    :param text: File contents.
    :param allowed: Keys that may appear.
    :param source: Name used in error messages.
    :return: Mapping of key to parsed value.
    :raises ConfigError: On a malformed line, an unknown or repeated key, or an unparsable value; the message
        names the line.
    """
    values: Dict[str, object] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in allowed:
            raise ConfigError(f"{source}:{number}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{number}: key {key!r} given twice")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{number}: bad value for {key}: {exc}") from None
    return values


def load_run_config(path: Optional[Union[str, Path]] = None, **overrides) -> RunConfig:
    """RunConfig from an optional file, with non-None keyword overrides applied on top."""
    values: Dict[str, object] = {}
    if path is not None:
        values = parse_key_values(Path(path).read_text(encoding="utf-8"), RUN_KEYS, str(path))
    config = RunConfig(**values).with_overrides(**overrides)
    logger.debug("run config %s", config.config_hash()[:12])
    return config


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """ExperimentConfig from a file that may mix run keys and experiment keys."""
    values = parse_key_values(Path(path).read_text(encoding="utf-8"), RUN_KEYS + EXPERIMENT_KEYS, str(path))
    run = RunConfig(**{k: v for k, v in values.items() if k in RUN_KEYS})
    return ExperimentConfig(run=run, **{k: v for k, v in values.items() if k in EXPERIMENT_KEYS})

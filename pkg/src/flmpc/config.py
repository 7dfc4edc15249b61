"""Experiment configuration: a ``key = value`` text file."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .fl import VARIANTS, RoundConfig
from .simulation.core import DEFAULT_BUDGET, MODES, CorruptionSet
from .values import format_rational, is_prime, parse_rational

TARGETS = ("aggregation", "fl")


def _rational_list(text: str) -> tuple[Fraction, ...]:
    return tuple(parse_rational(t) for t in text.split(",") if t.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    field_modulus: int
    dimension: int = 1
    clients: int = 2
    rounds: int = 1
    learning_rate: Fraction = Fraction(1, 4)
    scale: int = 1
    variant: str = "masked"
    seed: int = 0
    eligibility_min: int = 1
    corruption_sets: str = "server; clients"
    mode: str = "det"
    budget: int = DEFAULT_BUDGET
    data: str = ""
    initial_model: tuple[Fraction, ...] = ()
    target: str = "aggregation"
    grid_feature: Fraction = Fraction(1, 2)
    grid_labels: tuple[Fraction, ...] = (Fraction(-1), Fraction(-1, 2), Fraction(0), Fraction(1, 2), Fraction(1))
    workers: int = 1

    def __post_init__(self):
        if not is_prime(self.field_modulus):
            raise ConfigError(f"modulus not prime: {self.field_modulus}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        for name in ("dimension", "clients", "rounds", "scale", "budget", "workers"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.target not in TARGETS:
            raise ConfigError(f"target must be one of {TARGETS}, got {self.target!r}")
        if not self.initial_model:
            object.__setattr__(self, "initial_model", (Fraction(0),) * self.dimension)
        if len(self.initial_model) != self.dimension:
            raise ConfigError(f"initial_model has {len(self.initial_model)} components, dimension is {self.dimension}")
        if not self.grid_labels:
            raise ConfigError("grid_labels must not be empty")
        self.corruption()

    @property
    def m(self) -> int:
        return self.clients + 1

    def round_config(self) -> RoundConfig:
        return RoundConfig(self.m, self.field_modulus, self.dimension, self.learning_rate, self.scale)

    def corruption(self) -> list[CorruptionSet]:
        try:
            return [CorruptionSet.parse(t, self.m) for t in self.corruption_sets.split(";") if t.strip()]
        except Exception as exc:
            raise ConfigError(f"corruption_sets: {exc}") from None

    def with_overrides(self, **kw) -> ExperimentConfig:
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def canonical_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Fraction):
                v = format_rational(v)
            elif isinstance(v, tuple):
                v = ", ".join(format_rational(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        """Adler-32 of the canonical text, 8 hex digits."""
        return f"{zlib.adler32(self.canonical_text().encode()):08x}"


_PARSERS = {
    "field_modulus": int,
    "dimension": int,
    "clients": int,
    "rounds": int,
    "learning_rate": parse_rational,
    "scale": int,
    "variant": str,
    "seed": int,
    "eligibility_min": int,
    "corruption_sets": str,
    "mode": str,
    "budget": int,
    "data": str,
    "initial_model": _rational_list,
    "target": str,
    "grid_feature": parse_rational,
    "grid_labels": _rational_list,
    "workers": int,
}


def parse_config(text: str) -> ExperimentConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno) from None
    if "field_modulus" not in values:
        raise ConfigError("missing required key 'field_modulus'")
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)

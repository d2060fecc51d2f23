"""Run configuration: a JSON document that fully determines a campaign."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .analysis.fitting import VARIANTS
from .error_model import Strategy

COMMANDS = ("threshold", "overhead", "repeated")


class ConfigError(ValueError):
    """Malformed or incomplete run configuration."""


@dataclass
class Group:
    """One fitted family of points: fixed (alpha_sq, theta, p_meas), swept noise."""

    noise: list
    alpha_sq: float | None = None
    theta: int = 1
    p_meas: float | None = None
    distances: list | None = None

    def label(self) -> str:
        if self.p_meas is not None:
            return f"p_meas={self.p_meas:g}"
        return f"alpha_sq={self.alpha_sq:g},theta={self.theta}"


@dataclass
class RunConfig:
    command: str
    strategy: str
    seed: int
    groups: list
    distances: list = field(default_factory=lambda: [3, 5, 7, 9, 11])
    max_failures: int | None = None
    max_shots: int | None = None
    exponent_variant: str = "cd"
    workers: int = 1
    overhead_eta: list = field(default_factory=list)
    epsilon_l: float = 1e-10
    theta_max: int = 15
    name: str = ""

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {COMMANDS}")
        try:
            self.strategy = Strategy.parse(self.strategy).value
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer (no implicit entropy)")
        if self.exponent_variant not in VARIANTS:
            raise ConfigError(f"exponent_variant must be one of {VARIANTS}")
        if not self.groups:
            raise ConfigError("at least one group is required")
        if self.command != "repeated" and not self.distances:
            raise ConfigError("distances must be non-empty")
        if any(int(d) < 3 or int(d) % 2 == 0 for d in self.distances):
            raise ConfigError("distances must be odd and >= 3")
        phenom = self.strategy == Strategy.PHENOMENOLOGICAL.value
        for g in self.groups:
            if self.command != "repeated" and not g.noise:
                raise ConfigError(f"group {g.label()} has an empty noise grid")
            if phenom and g.p_meas is None:
                raise ConfigError("phenomenological groups need p_meas")
            if not phenom and g.alpha_sq is None:
                raise ConfigError("circuit-level groups need alpha_sq")
            if int(g.theta) < 1:
                raise ConfigError("theta must be >= 1")
        if self.command == "overhead":
            if phenom:
                raise ConfigError("overhead needs a cat-qubit strategy")
            if not self.overhead_eta:
                raise ConfigError("overhead needs a non-empty overhead_eta grid")
            if not self.epsilon_l > 0:
                raise ConfigError("epsilon_l must be > 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        if "config" in data and "command" not in data:
            # an output document with the config embedded
            data = data["config"]
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "seed" not in data or data["seed"] is None:
            raise ConfigError("seed is mandatory")
        for key in ("command", "strategy", "groups"):
            if key not in data:
                raise ConfigError(f"missing config key {key!r}")
        gkeys = {f.name for f in fields(Group)}
        groups = []
        for g in data["groups"]:
            if not isinstance(g, dict) or set(g) - gkeys or "noise" not in g:
                raise ConfigError(f"malformed group {g!r}")
            groups.append(Group(**g))
        return cls(**{**data, "groups": groups}).validate()

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)

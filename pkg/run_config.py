"""
Run configuration: parameter grids, caps, seeds and output settings.

A RunConfig can be built from argparse flags, from a YAML file, or from a
plain mapping (the HTTP service). Flags given explicitly on the command
line override values from the file.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

from gibbs_exact import DENSE_CAP, ENUMERATION_CAP
from hamiltonians import ErgmParams, Params, ScalarParams
from verifiers.duplication import DOUBLED_CAP, P_LATTICE_EXHAUSTIVE_CAP, SECTOR_CAP
from verifiers.inequalities import DERIVATIVE_CAP, FKG_EXHAUSTIVE_CAP, MONOTONE_AUDIT_CAP, SWEEP_CAP

# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------
OUTPUT_DIR_ENV = "TWOSTAR_OUTPUT_DIR"
COMMANDS = (
    "exact", "ursell", "verify", "phase", "fixpoint", "curve", "mcmc", "concavity", "coexistence", "conjecture",
)
VERIFY_TARGETS = (
    "fkg-lattice", "fkg", "gks", "ghs", "vol-mono", "part-submod", "duplication", "u3-repr", "p-lattice",
)
MODELS = ("two-star", "ergm-wedge", "ergm-triangle")
FORMATS = ("csv", "json")
ENUMERATING_COMMANDS = ("exact", "ursell", "verify", "conjecture")
TWO_STAR_ONLY_TARGETS = ("duplication", "u3-repr", "p-lattice")
MAX_GKS_SIZE = 6

# Per-target edge caps beyond the global enumeration cap.
TARGET_EDGE_CAPS = {
    "ursell": DENSE_CAP,
    "conjecture": DENSE_CAP,
    "gks": DENSE_CAP,
    "ghs": DENSE_CAP,
    "fkg": DENSE_CAP,
    "vol-mono": DENSE_CAP,
    "part-submod": SWEEP_CAP,
    "duplication": DOUBLED_CAP,
    "u3-repr": DOUBLED_CAP,
    "p-lattice": SECTOR_CAP,
}


class ConfigError(ValueError):
    """Invalid run configuration (bad grid, unknown command, cap out of range)."""


def parse_grid(text: str) -> list[float]:
    """
    Parse ``start:stop:step`` (endpoints included within half a step),
    a comma list ``a,b,c``, or a single number.
    """
    text = str(text).strip()
    if not text:
        raise ConfigError("empty grid")
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ConfigError(f"grid {text!r} must have the form start:stop:step")
            start, stop, step = parts
            if not step > 0:
                raise ConfigError(f"grid {text!r}: step must be positive")
            if stop < start:
                raise ConfigError(f"grid {text!r} is empty (stop < start)")
            count = math.floor((stop - start) / step + 0.5) + 1
            return [round(start + k * step, 12) for k in range(count)]
        values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"cannot parse grid {text!r}: {e}") from None
    if not values:
        raise ConfigError(f"grid {text!r} is empty")
    if not all(math.isfinite(v) for v in values):
        raise ConfigError(f"grid {text!r} contains non-finite values")
    return values


def _grid_value(value: Any) -> list[float]:
    if isinstance(value, str):
        return parse_grid(value)
    if isinstance(value, (int, float)):
        return [float(value)]
    try:
        values = [float(v) for v in value]
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read grid from {value!r}") from None
    if not values:
        raise ConfigError("empty grid")
    return values


GRID_FIELDS = ("alpha", "h", "beta1", "beta2")


@dataclass
class RunConfig:
    """Everything a run needs; every report echoes it back in its meta block."""
    command: str
    target: str | None = None
    n: int = 4
    model: str = "two-star"
    alpha: list[float] = field(default_factory=lambda: [0.0])
    h: list[float] = field(default_factory=lambda: [0.0])
    beta1: list[float] = field(default_factory=lambda: [0.0])
    beta2: list[float] = field(default_factory=lambda: [0.0])
    enum_cap: int = ENUMERATION_CAP
    gks_size: int = 3
    seed: int = 0
    workers: int = 1
    chains: int = 8
    sweeps: int = 2_000
    burn_in: int = 1_000
    thinning: int = 10
    schedule: str = "auto"
    mode: str = "exact"
    bins: int = 50
    out: Path | None = None
    fmt: str = "csv"

    def __post_init__(self):
        for name in GRID_FIELDS:
            setattr(self, name, _grid_value(getattr(self, name)))
        if self.out is not None:
            self.out = Path(self.out)
        self.validate()

    @property
    def m(self) -> int:
        return self.n * (self.n - 1) // 2

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        if self.command == "verify" and self.target not in VERIFY_TARGETS:
            raise ConfigError(f"verify needs a target from {', '.join(VERIFY_TARGETS)}, got {self.target!r}")
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if self.n < 2:
            raise ConfigError(f"n must be at least 2, got {self.n}")
        if not 1 <= self.enum_cap <= ENUMERATION_CAP:
            raise ConfigError(f"enumeration cap must lie in [1, {ENUMERATION_CAP}], got {self.enum_cap}")
        if not 1 <= self.gks_size <= MAX_GKS_SIZE:
            raise ConfigError(f"GKS subset size cap must lie in [1, {MAX_GKS_SIZE}], got {self.gks_size}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.mode not in ("exact", "mcmc"):
            raise ConfigError(f"mode must be exact or mcmc, got {self.mode!r}")
        if self.command in ("mcmc", "coexistence") or (self.command == "concavity" and self.mode == "mcmc"):
            if not self.sweeps > self.burn_in >= 0 or self.thinning < 1 or self.chains < 1:
                raise ConfigError("chains need sweeps > burn_in >= 0, thinning >= 1 and chains >= 1")
        if self.command == "coexistence":
            if self.bins < 1:
                raise ConfigError(f"bins must be at least 1, got {self.bins}")
            if min(self.alpha) <= 2:
                raise ConfigError("the coexistence curve exists for alpha > 2 only")
        enumerates = self.command in ENUMERATING_COMMANDS or (self.command == "concavity" and self.mode == "exact")
        if enumerates and self.m > self.enum_cap:
            raise ConfigError(
                f"n={self.n} has {self.m} edges, above the enumeration cap {self.enum_cap}; use the mcmc command"
            )
        cap_key = self.target if self.command == "verify" else self.command
        cap = TARGET_EDGE_CAPS.get(cap_key)
        if cap is not None and self.m > cap:
            raise ConfigError(f"{cap_key} supports at most {cap} edges; n={self.n} has {self.m}")
        if self.target in TWO_STAR_ONLY_TARGETS and self.model != "two-star":
            raise ConfigError(f"{self.target} is defined for the two-star model only")

    def params_grid(self) -> list[Params]:
        """Parameter points in grid order (alpha-major for two-star, beta1-major for ERGMs)."""
        if self.model == "two-star":
            return [ScalarParams(a, h) for a in self.alpha for h in self.h]
        build = ErgmParams.two_star if self.model == "ergm-wedge" else ErgmParams.edge_triangle
        return [build(b1, b2) for b1 in self.beta1 for b2 in self.beta2]

    def output_path(self) -> Path | None:
        """--out if given; bare file names and the default land in $TWOSTAR_OUTPUT_DIR when set."""
        env_dir = os.environ.get(OUTPUT_DIR_ENV)
        if self.out is not None:
            if env_dir and self.out.parent == Path("."):
                return Path(env_dir) / self.out
            return self.out
        if env_dir:
            stem = self.command if self.target is None else f"{self.command}-{self.target}"
            return Path(env_dir) / f"{stem}.{self.fmt}"
        return None

    def as_meta(self) -> dict[str, Any]:
        meta = asdict(self)
        meta["out"] = str(self.out) if self.out is not None else None
        meta["caps"] = {
            "enumeration": self.enum_cap,
            "gks_size": self.gks_size,
            "dense_table": DENSE_CAP,
            "fkg_exhaustive": FKG_EXHAUSTIVE_CAP,
            "monotone_audit": MONOTONE_AUDIT_CAP,
            "derivative": DERIVATIVE_CAP,
            "part_submod_sweep": SWEEP_CAP,
            "doubled": DOUBLED_CAP,
            "sectors": SECTOR_CAP,
            "p_lattice_exhaustive": P_LATTICE_EXHAUSTIVE_CAP,
        }
        return meta

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")
        if "command" not in data:
            raise ConfigError("configuration needs a command")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def from_yaml(cls, path: Path, overrides: dict[str, Any] | None = None) -> RunConfig:
        """Load a YAML mapping and apply non-None ``overrides`` on top."""
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from None
        except yaml.YAMLError as e:
            raise ConfigError(f"invalid YAML in {path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping")
        data.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_mapping(data)

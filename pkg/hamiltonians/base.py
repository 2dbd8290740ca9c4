"""Parameter types and the Hamiltonian base class."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from graph_core import EDGE, EdgeIndexing, SubgraphPattern, WEDGE, TRIANGLE, build_edge_index, wedge_list


def _require_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ScalarParams:
    """Two-star couplings: wedge weight alpha (scaled by 1/n) and edge field h."""
    alpha: float
    h: float

    kind = "scalar"

    def __post_init__(self):
        _require_finite("alpha", self.alpha)
        _require_finite("h", self.h)

    @classmethod
    def from_betas(cls, beta1: float, beta2: float, n: int) -> ScalarParams:
        """Exact two-star counterpart of the edge+wedge ERGM (beta1, beta2) on K_n."""
        return cls(alpha=2.0 * beta2, h=2.0 * beta1 + 2.0 * beta2 / n)

    @classmethod
    def asymptotic_from_betas(cls, beta1: float, beta2: float) -> ScalarParams:
        """The n-independent parametrisation alpha = 2 beta2, h = 2 beta1."""
        return cls(alpha=2.0 * beta2, h=2.0 * beta1)

    def generalize(self, idx: EdgeIndexing) -> GeneralizedParams:
        return GeneralizedParams.uniform(idx.n, self.alpha, self.h)

    def as_record(self) -> dict[str, float]:
        return {"alpha": self.alpha, "h": self.h}


@dataclass(frozen=True, eq=False)
class GeneralizedParams:
    """Per-wedge couplings alpha_ij and per-edge fields h_i."""
    alpha_map: Mapping[tuple[int, int], float]
    h_vec: tuple[float, ...]

    kind = "generalized"

    def __post_init__(self):
        for key, value in self.alpha_map.items():
            _require_finite(f"alpha{key}", value)
        for i, value in enumerate(self.h_vec):
            _require_finite(f"h[{i}]", value)

    @classmethod
    def uniform(cls, n: int, alpha: float, h: float) -> GeneralizedParams:
        idx = build_edge_index(n)
        return cls(
            alpha_map={pair: float(alpha) for pair in wedge_list(idx).pairs},
            h_vec=(float(h),) * idx.m,
        )

    def validate(self, idx: EdgeIndexing) -> None:
        if len(self.h_vec) != idx.m:
            raise ValueError(f"h_vec has length {len(self.h_vec)}, expected m = {idx.m}")
        expected = set(wedge_list(idx).pairs)
        if set(self.alpha_map) != expected:
            raise ValueError("alpha_map must be keyed exactly by the wedge list of K_n")

    def with_alpha(self, wedge: tuple[int, int], value: float) -> GeneralizedParams:
        key = (min(wedge), max(wedge))
        if key not in self.alpha_map:
            raise ValueError(f"{key} is not a wedge")
        alpha_map = dict(self.alpha_map)
        alpha_map[key] = float(value)
        return GeneralizedParams(alpha_map=alpha_map, h_vec=self.h_vec)

    def shifted_field(self, dh: float) -> GeneralizedParams:
        return GeneralizedParams(alpha_map=self.alpha_map, h_vec=tuple(h + dh for h in self.h_vec))

    def shifted_alpha(self, d_alpha: float) -> GeneralizedParams:
        return GeneralizedParams(
            alpha_map={k: a + d_alpha for k, a in self.alpha_map.items()}, h_vec=self.h_vec,
        )

    @property
    def min_alpha(self) -> float:
        return min(self.alpha_map.values(), default=0.0)

    @property
    def min_h(self) -> float:
        return min(self.h_vec, default=0.0)

    def as_record(self) -> dict[str, float]:
        return {
            "alpha_min": self.min_alpha,
            "alpha_max": max(self.alpha_map.values(), default=0.0),
            "h_min": self.min_h,
            "h_max": max(self.h_vec, default=0.0),
        }


@dataclass(frozen=True)
class ErgmParams:
    """Coefficients beta_j of homomorphism densities t(H_j, G); H_1 is the edge."""
    patterns: tuple[SubgraphPattern, ...]
    betas: tuple[float, ...]

    kind = "ergm"

    def __post_init__(self):
        if not self.patterns:
            raise ValueError("ERGM needs at least one pattern")
        if self.patterns[0] != EDGE:
            raise ValueError("the first ERGM pattern must be the edge")
        if len(self.patterns) != len(self.betas):
            raise ValueError("patterns and betas must have the same length")
        for j, beta in enumerate(self.betas):
            _require_finite(f"beta{j + 1}", beta)

    @classmethod
    def two_star(cls, beta1: float, beta2: float) -> ErgmParams:
        return cls(patterns=(EDGE, WEDGE), betas=(beta1, beta2))

    @classmethod
    def edge_triangle(cls, beta1: float, beta2: float) -> ErgmParams:
        return cls(patterns=(EDGE, TRIANGLE), betas=(beta1, beta2))

    @property
    def higher_betas_nonnegative(self) -> bool:
        return all(b >= 0 for b in self.betas[1:])

    def as_record(self) -> dict[str, float]:
        record: dict[str, float] = {}
        for j, (pattern, beta) in enumerate(zip(self.patterns, self.betas), start=1):
            record[f"beta{j}"] = beta
            record[f"H{j}"] = pattern.tag
        return record


Params = ScalarParams | GeneralizedParams | ErgmParams


# ---------------------------------------------------------------------------
# Hamiltonian interface
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class HamiltonianContext:
    """Ambient graph and active edge subset a Hamiltonian is evaluated on."""
    idx: EdgeIndexing
    active: tuple[int, ...]
    scale_n: int = field(default=0)

    def __post_init__(self):
        if not self.scale_n:
            object.__setattr__(self, "scale_n", self.idx.n)


class Hamiltonian(ABC):
    """Energy of 0/1 edge configurations supported on an active subset."""

    def __init__(self, ctx: HamiltonianContext):
        self.ctx = ctx

    @property
    def n(self) -> int:
        return self.ctx.scale_n

    @abstractmethod
    def energies(self, bits: np.ndarray) -> np.ndarray:
        """
        Evaluate H on a batch of full-width configurations.

        Args:
            bits: uint8 array of shape (N, m); columns outside the active
                subset are expected to be zero.

        Returns:
            float64 array of shape (N,)
        """

    @abstractmethod
    def is_ferromagnetic(self) -> bool:
        """True when every interaction term has a non-negative coefficient."""

    def flip_gain(self, bits: np.ndarray, i: int) -> np.ndarray:
        """H(x with x_i = 1) - H(x with x_i = 0), for each row of ``bits``."""
        on = bits.copy()
        on[:, i] = 1
        off = bits.copy()
        off[:, i] = 0
        return self.energies(on) - self.energies(off)

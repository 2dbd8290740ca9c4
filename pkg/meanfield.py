"""
Infinite-size variational problem of the two-star model.

The limiting free energy is the supremum over u in [0, 1] of
F(u) = alpha u^2 / 2 + h u / 2 - I(u) / 2, with I(u) = u ln u + (1-u) ln(1-u).
Its stationary points solve u = sigma(2 alpha u + h).
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.optimize import bisect
from scipy.special import expit, xlogy

logger = logging.getLogger("twostar-lab.meanfield")

# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------
SCAN_INTERVALS = 10_000
ROOT_XTOL = 1e-12
RESIDUAL_TOL = 1e-10
TIE_TOL = 1e-10
CRITICAL_TOL = 1e-6
CURVE_XTOL = 1e-12      # finer than the 1e-8 required so the objective gap also closes
VARIANCE_STEP = 1e-5
VARIANCE_TOL = 1e-6
CRITICAL_POINT = (2.0, -2.0)


class MeanFieldError(ValueError):
    """Mean-field quantity requested outside its domain."""


@dataclass(frozen=True)
class PhasePoint:
    alpha: float
    h: float
    roots: tuple[float, ...]
    maximizers: tuple[float, ...]
    classification: str          # unique | coexistence | critical
    variances: tuple[float | None, ...]

    @property
    def u_star(self) -> float:
        return self.maximizers[0]

    def to_record(self) -> dict[str, Any]:
        return {
            "alpha": self.alpha,
            "h": self.h,
            "n_roots": len(self.roots),
            "u_star_1": self.maximizers[0],
            "u_star_2": self.maximizers[1] if len(self.maximizers) > 1 else None,
            "classification": self.classification,
            "variance": self.variances[0] if self.classification == "unique" else None,
        }


@dataclass(frozen=True)
class CriticalCurveSample:
    alpha: float
    q: float
    objective_gap: float

    def to_record(self) -> dict[str, float]:
        return {"alpha": self.alpha, "q": self.q, "objective_gap": self.objective_gap}


def _check_unit(u) -> np.ndarray:
    arr = np.asarray(u, dtype=np.float64)
    if np.any((arr < 0) | (arr > 1)) or np.any(~np.isfinite(arr)):
        raise MeanFieldError(f"u must lie in [0, 1], got {u!r}")
    return arr


def entropy(u):
    """I(u) with I(0) = I(1) = 0."""
    arr = _check_unit(u)
    value = xlogy(arr, arr) + xlogy(1 - arr, 1 - arr)
    return float(value) if value.ndim == 0 else value


def objective(u, alpha: float, h: float):
    arr = _check_unit(u)
    value = alpha * arr ** 2 / 2 + h * arr / 2 - (xlogy(arr, arr) + xlogy(1 - arr, 1 - arr)) / 2
    return float(value) if value.ndim == 0 else value


def residual(u: float, alpha: float, h: float) -> float:
    return float(expit(2 * alpha * u + h) - u)


def curvature(u: float, alpha: float) -> float:
    """1 - 2 alpha u (1 - u); positive at a strict local maximum of F."""
    return 1 - 2 * alpha * u * (1 - u)


def fixed_points(alpha: float, h: float) -> list[float]:
    """
    All roots of sigma(2 alpha u + h) = u in [0, 1], ascending.

    Sign-change scan on a uniform grid of SCAN_INTERVALS cells, then
    bisection to ROOT_XTOL. Grid points where the residual is exactly zero
    are roots themselves.
    """
    grid = np.arange(SCAN_INTERVALS + 1) / SCAN_INTERVALS
    r = expit(2 * alpha * grid + h) - grid
    roots = [float(u) for u in grid[r == 0.0]]
    for k in np.nonzero(r[:-1] * r[1:] < 0)[0]:
        roots.append(float(bisect(residual, grid[k], grid[k + 1], args=(alpha, h), xtol=ROOT_XTOL)))
    roots.sort()
    return roots


def classify(alpha: float, h: float) -> PhasePoint:
    """Global maximizers of F among the fixed points, and the phase they indicate."""
    roots = fixed_points(alpha, h)
    values = [objective(r, alpha, h) for r in roots]
    best = max(values)
    maximizers = tuple(
        r for r, v in zip(roots, values) if v >= best - TIE_TOL and curvature(r, alpha) >= -CRITICAL_TOL
    )
    if len(maximizers) > 1:
        label = "coexistence"
    elif abs(curvature(maximizers[0], alpha)) <= CRITICAL_TOL:
        label = "critical"
    else:
        label = "unique"
    variances = tuple(
        None if abs(curvature(u, alpha)) <= CRITICAL_TOL else u * (1 - u) / curvature(u, alpha)
        for u in maximizers
    )
    return PhasePoint(
        alpha=alpha, h=h, roots=tuple(roots), maximizers=maximizers,
        classification=label, variances=variances,
    )


def _outer_gap(h: float, alpha: float) -> float:
    roots = fixed_points(alpha, h)
    if len(roots) == 1:
        return 1.0 if roots[0] > 0.5 else -1.0
    return objective(roots[-1], alpha, h) - objective(roots[0], alpha, h)


def critical_curve(alpha: float) -> CriticalCurveSample:
    """
    The field q(alpha) at which the low- and high-density maximizers tie.

    Bisects the objective gap F(u_high) - F(u_low) in h over [-2 alpha, 0].
    """
    if alpha <= CRITICAL_POINT[0]:
        raise MeanFieldError(f"the coexistence curve exists for alpha > 2, got {alpha}")
    q = float(bisect(_outer_gap, -2 * alpha, 0.0, args=(alpha,), xtol=CURVE_XTOL))
    return CriticalCurveSample(alpha=alpha, q=q, objective_gap=_outer_gap(q, alpha))


def limiting_variance(alpha: float, h: float) -> float:
    """v = u*(1 - u*) / (1 - 2 alpha u*(1 - u*)) in the uniqueness region."""
    point = classify(alpha, h)
    if point.classification != "unique":
        raise MeanFieldError(f"variance undefined at ({alpha}, {h}): {point.classification} point")
    return point.variances[0]


def variance_finite_difference(alpha: float, h: float, step: float = VARIANCE_STEP) -> float:
    """Central difference of u*(alpha, h) in h."""
    hi = classify(alpha, h + step)
    lo = classify(alpha, h - step)
    if hi.classification != "unique" or lo.classification != "unique":
        raise MeanFieldError(f"u* is not smooth around ({alpha}, {h})")
    return (hi.u_star - lo.u_star) / (2 * step)


def phase_grid(alphas: Iterable[float], hs: Iterable[float], workers: int = 1) -> list[PhasePoint]:
    """Classify every (alpha, h) cell; alpha-major, h-minor order."""
    cells = [(a, h) for a in alphas for h in hs]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(lambda c: classify(*c), cells))
    else:
        points = [classify(a, h) for a, h in cells]
    logger.info("Phase grid finished: %d cells, %d coexistence", len(points),
                sum(p.classification == "coexistence" for p in points))
    return points


def finite_size_fixed_point(n: int, alpha: float, h: float) -> float:
    """
    Global maximizer for p = sigma((2 alpha (n-2)/n) p + h).

    Each edge of K_n has 2(n-2) neighbours, so this is the mean-field
    equation with the exact neighbour count.
    """
    if n < 2:
        raise MeanFieldError(f"K_n has edges only for n >= 2, got {n}")
    return classify(alpha * (n - 2) / n, h).u_star

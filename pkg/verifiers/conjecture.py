"""
Explorer for the sign of the third Ursell function outside the proven region.

For each parameter point it records the smallest edge marginal and the
largest u3 over all triples, and whether a positive u3 shows up together
with some E[x_i] < 1/2. It reports; it never asserts.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from gibbs_exact import build_system
from hamiltonians import Params
from .inequalities import diagonal_identities, ursell_tensors
from .reports import SLACK

logger = logging.getLogger("twostar-lab.conjecture")


@dataclass
class ConjecturePoint:
    params: dict[str, Any]
    min_edge_mean: float
    worst_u3: float
    witness: tuple[int, int, int]
    cube_error: float
    pair_error: float
    ferromagnetic: bool = True

    @property
    def ghs_violated(self) -> bool:
        return self.worst_u3 > SLACK

    @property
    def below_half(self) -> bool:
        return self.min_edge_mean < 0.5

    @property
    def co_occurs(self) -> bool:
        return self.ghs_violated and self.below_half

    def to_record(self) -> dict[str, Any]:
        record = dict(self.params)
        record.update(
            min_edge_mean=self.min_edge_mean,
            worst_u3=self.worst_u3,
            witness="|".join(str(e) for e in self.witness),
            ghs_violated=self.ghs_violated,
            below_half=self.below_half,
            co_occurs=self.co_occurs,
            cube_error=self.cube_error,
            pair_error=self.pair_error,
            ferromagnetic=self.ferromagnetic,
        )
        return record


def scan_point(n: int, params: Params) -> ConjecturePoint:
    sys = build_system(n, params)
    t = ursell_tensors(sys)
    a, b, c = np.unravel_index(int(np.argmax(t.u3)), t.u3.shape)
    diag = diagonal_identities(sys)
    return ConjecturePoint(
        params=sys.param_record(),
        min_edge_mean=float(t.u1.min()),
        worst_u3=float(t.u3[a, b, c]),
        witness=(sys.active[a], sys.active[b], sys.active[c]),
        cube_error=diag["cube_error"],
        pair_error=diag["pair_error"],
        ferromagnetic=sys.hamiltonian.is_ferromagnetic(),
    )


def conjecture_scan(n: int, grid: Iterable[Params], workers: int = 1) -> list[ConjecturePoint]:
    """
    Scan a parameter grid (scalar, generalized or ERGM) on K_n.

    Points are returned in grid order whatever the worker count.
    """
    points = list(grid)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda p: scan_point(n, p), points))
    else:
        results = [scan_point(n, p) for p in points]
    logger.info("Conjecture scan finished: %d points, %d with u3 > 0", len(results),
                sum(r.ghs_violated for r in results))
    return results


def atlas_summary(points: list[ConjecturePoint]) -> dict[str, int]:
    """Counts of the four (u3 > 0, min E < 1/2) combinations, plus u3 > 0 at ferromagnetic points."""
    return {
        "points": len(points),
        "ghs_violated": sum(p.ghs_violated for p in points),
        "below_half": sum(p.below_half for p in points),
        "co_occurs": sum(p.co_occurs for p in points),
        "violated_above_half": sum(p.ghs_violated and not p.below_half for p in points),
        "violated_ferromagnetic": sum(p.ghs_violated and p.ferromagnetic for p in points),
    }

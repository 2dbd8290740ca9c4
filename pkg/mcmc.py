"""
Heat-bath (Glauber) dynamics for the two-star model.

An edge e = {u, v} has 2(n-2) wedge partners; with degrees d maintained
incrementally, the number of present partners is d_u + d_v - 2 x_e and

    P(x_e = 1 | rest) = sigma((alpha/n)(d_u + d_v - 2 x_e) + h).

Chains run in lockstep as rows of one (chains, m) array, each row driven
by its own generator seeded from (master seed, chain index).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np
from scipy.stats import kurtosis, skew
from scipy.special import expit

from gibbs_exact import build_system, statistic_moments
from graph_core import Config, build_edge_index
from hamiltonians import ScalarParams
from meanfield import classify, critical_curve

logger = logging.getLogger("twostar-lab.mcmc")

# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------
DEFAULT_BURN_IN = 1_000
DEFAULT_THINNING = 10
RANDOM_SCAN_MAX_EDGES = 500   # "auto" uses the random scan up to this many edges
SINGLE_CHAIN_BATCHES = 10
CONCAVITY_TOL = 1e-10
SCHEDULES = ("random", "matching", "auto")
INITIAL_STATES = ("empty", "full", "random")


# ---------------------------------------------------------------------------
# Single-configuration operations
# ---------------------------------------------------------------------------
def conditional_prob(c: Config, i: int, params: ScalarParams) -> float:
    """P(x_i = 1 | all other edges) under the scalar two-star measure on K_n."""
    idx = c.indexing
    u, v = idx.pair_of(i)
    adj = c.adjacency()
    partners = int(adj[u].sum() + adj[v].sum() - 2 * c.bits[i])
    return float(expit(params.alpha / c.n * partners + params.h))


def _random_scan(
    X: np.ndarray, deg: np.ndarray, eu: np.ndarray, ev: np.ndarray,
    coupling: float, h: float, edges: np.ndarray, uniforms: np.ndarray,
) -> None:
    """In-place heat-bath updates at edges[:, t], t = 0..T-1, one edge per chain per step."""
    rows = np.arange(len(X))
    for t in range(edges.shape[1]):
        e = edges[:, t]
        u, v = eu[e], ev[e]
        old = X[rows, e].astype(np.int64)
        p = expit(coupling * (deg[rows, u] + deg[rows, v] - 2 * old) + h)
        new = (uniforms[:, t] < p).astype(np.int64)
        delta = new - old
        X[rows, e] = new
        deg[rows, u] += delta
        deg[rows, v] += delta


def glauber_sweep(c: Config, params: ScalarParams, rng: np.random.Generator) -> Config:
    """m heat-bath updates at uniformly random edges."""
    idx = c.indexing
    eu, ev = idx.endpoints()
    X = c.as_array()[None, :].copy()
    deg = c.adjacency().sum(axis=1)[None, :].astype(np.int64)
    edges = rng.integers(0, idx.m, size=(1, idx.m))
    uniforms = rng.random((1, idx.m))
    _random_scan(X, deg, eu, ev, params.alpha / c.n, params.h, edges, uniforms)
    return Config.from_array(c.n, X[0])


@lru_cache(maxsize=32)
def matching_rounds(n: int) -> tuple[np.ndarray, ...]:
    """
    Round-robin perfect matchings of K_n as edge-id arrays.

    Every edge appears in exactly one round. Odd n gets a dummy vertex whose
    partner sits the round out.
    """
    idx = build_edge_index(n)
    size = n + (n % 2)
    ring = list(range(1, size))
    rounds = []
    for _ in range(size - 1):
        pairs = [(0, ring[-1])] + [(ring[k], ring[-2 - k]) for k in range((size - 2) // 2)]
        ids = [idx.id_of(a, b) for a, b in pairs if a < n and b < n]
        rounds.append(np.array(sorted(ids), dtype=np.int64))
        ring = ring[-1:] + ring[:-1]
    return tuple(rounds)


def _matching_sweep(
    X: np.ndarray, deg: np.ndarray, eu: np.ndarray, ev: np.ndarray,
    coupling: float, h: float, rounds: tuple[np.ndarray, ...], uniforms: np.ndarray,
) -> None:
    """One systematic sweep; edges of a matching are conditionally independent."""
    offset = 0
    for R in rounds:
        u, v = eu[R], ev[R]
        old = X[:, R].astype(np.int64)
        p = expit(coupling * (deg[:, u] + deg[:, v] - 2 * old) + h)
        new = (uniforms[:, offset:offset + len(R)] < p).astype(np.int64)
        delta = new - old
        X[:, R] = new
        deg[:, u] += delta
        deg[:, v] += delta
        offset += len(R)


# ---------------------------------------------------------------------------
# Chains
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class ChainSpec:
    """Independent heat-bath chains at one scalar parameter point."""
    n: int
    alpha: float
    h: float
    sweeps: int
    burn_in: int = DEFAULT_BURN_IN
    thinning: int = DEFAULT_THINNING
    seed: int = 0
    chains: int = 1
    schedule: str = "auto"
    init: str = "empty"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"chains need n >= 2, got {self.n}")
        if not self.sweeps > self.burn_in >= 0:
            raise ValueError(f"need sweeps > burn_in >= 0, got {self.sweeps}, {self.burn_in}")
        if self.thinning < 1:
            raise ValueError(f"thinning must be >= 1, got {self.thinning}")
        if self.chains < 1:
            raise ValueError(f"need at least one chain, got {self.chains}")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"schedule must be one of {', '.join(SCHEDULES)}")
        if self.init not in INITIAL_STATES:
            raise ValueError(f"init must be one of {', '.join(INITIAL_STATES)}")

    @property
    def params(self) -> ScalarParams:
        return ScalarParams(self.alpha, self.h)

    @property
    def m(self) -> int:
        return self.n * (self.n - 1) // 2

    @property
    def resolved_schedule(self) -> str:
        if self.schedule != "auto":
            return self.schedule
        return "random" if self.m <= RANDOM_SCAN_MAX_EDGES else "matching"

    def as_record(self) -> dict[str, Any]:
        record = asdict(self)
        record["schedule"] = self.resolved_schedule
        return record


def _between_chain_se(series: np.ndarray) -> float:
    """Standard error of the pooled mean from chain means (batch means for one chain)."""
    if series.shape[0] > 1:
        means = series.mean(axis=1)
    else:
        batches = np.array_split(series[0], min(SINGLE_CHAIN_BATCHES, series.shape[1]))
        means = np.array([b.mean() for b in batches if len(b)])
    if len(means) < 2:
        return math.nan
    return float(means.std(ddof=1) / math.sqrt(len(means)))


@dataclass
class ChainSummary:
    """Per-chain recorded series and pooled statistics."""
    spec: ChainSpec
    edges: np.ndarray    # (chains, samples) edge counts E_n
    wedges: np.ndarray   # (chains, samples) number of present wedges
    stats: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        n, m = self.spec.n, self.spec.m
        density = 2 * self.edges / n ** 2
        prob = self.edges / m
        mean_edges = float(self.edges.mean())
        standardized = (math.sqrt(2) * (self.edges - mean_edges) / n).ravel()
        self.stats = {
            "samples": int(self.edges.size),
            "mean_density": float(density.mean()),
            "se_density": _between_chain_se(density),
            "mean_edge_prob": float(prob.mean()),
            "se_edge_prob": _between_chain_se(prob),
            "mean_edges": mean_edges,
            "se_edges": _between_chain_se(self.edges.astype(np.float64)),
            "mean_wedges": float(self.wedges.mean()),
            "se_wedges": _between_chain_se(self.wedges.astype(np.float64)),
            "std_variance": float(standardized.var(ddof=1)) if standardized.size > 1 else math.nan,
            "skewness": float(skew(standardized)) if standardized.size > 2 else math.nan,
            "excess_kurtosis": float(kurtosis(standardized)) if standardized.size > 3 else math.nan,
        }

    @property
    def density(self) -> np.ndarray:
        return 2 * self.edges / self.spec.n ** 2

    def to_record(self) -> dict[str, Any]:
        record = self.spec.as_record()
        record.update(self.stats)
        return record


def _initial_state(spec: ChainSpec, rngs: Sequence[np.random.Generator]) -> np.ndarray:
    if spec.init == "full":
        return np.ones((spec.chains, spec.m), dtype=np.uint8)
    if spec.init == "random":
        return np.stack([(rng.random(spec.m) < 0.5).astype(np.uint8) for rng in rngs])
    return np.zeros((spec.chains, spec.m), dtype=np.uint8)


def chain_generators(seed: int, chains: int) -> list[np.random.Generator]:
    return [np.random.default_rng(np.random.SeedSequence([seed, c])) for c in range(chains)]


def run_chains(spec: ChainSpec) -> ChainSummary:
    """
    Run ``spec.chains`` chains for ``spec.sweeps`` sweeps each.

    The state is recorded after every ``thinning``-th sweep once the
    ``burn_in`` sweeps are done.
    """
    idx = build_edge_index(spec.n)
    eu, ev = idx.endpoints()
    rngs = chain_generators(spec.seed, spec.chains)
    X = _initial_state(spec, rngs)
    deg = np.zeros((spec.chains, spec.n), dtype=np.int64)
    np.add.at(deg, (slice(None), eu), X.astype(np.int64))
    np.add.at(deg, (slice(None), ev), X.astype(np.int64))
    coupling = spec.alpha / spec.n
    schedule = spec.resolved_schedule
    rounds = matching_rounds(spec.n) if schedule == "matching" else ()

    edge_series: list[np.ndarray] = []
    wedge_series: list[np.ndarray] = []
    for sweep in range(spec.sweeps):
        uniforms = np.stack([rng.random(spec.m) for rng in rngs])
        if schedule == "matching":
            _matching_sweep(X, deg, eu, ev, coupling, spec.h, rounds, uniforms)
        else:
            edges = np.stack([rng.integers(0, spec.m, size=spec.m) for rng in rngs])
            _random_scan(X, deg, eu, ev, coupling, spec.h, edges, uniforms)
        done = sweep + 1
        if done > spec.burn_in and (done - spec.burn_in) % spec.thinning == 0:
            edge_series.append(X.sum(axis=1, dtype=np.int64))
            wedge_series.append((deg * (deg - 1) // 2).sum(axis=1))

    if not edge_series:
        raise ValueError("no samples recorded; increase sweeps or lower thinning")
    summary = ChainSummary(
        spec=spec, edges=np.stack(edge_series, axis=1), wedges=np.stack(wedge_series, axis=1),
    )
    logger.info(
        "Chains finished: n=%d alpha=%g h=%g chains=%d samples=%d schedule=%s",
        spec.n, spec.alpha, spec.h, spec.chains, summary.stats["samples"], schedule,
    )
    return summary


def _z_score(diff: float, se: float) -> float:
    if se > 0:
        return diff / se
    return 0.0 if diff == 0 else math.copysign(math.inf, diff)


def exact_oracle(summary: ChainSummary) -> dict[str, float]:
    """Exact edge and wedge means at the chain's parameters, with z-scores of the chain estimates."""
    spec = summary.spec
    moments = statistic_moments(build_system(spec.n, spec.params))
    s = summary.stats
    return {
        "exact_edges": moments["mean_edges"],
        "exact_wedges": moments["mean_wedges"],
        "z_edges": _z_score(s["mean_edges"] - moments["mean_edges"], s["se_edges"]),
        "z_wedges": _z_score(s["mean_wedges"] - moments["mean_wedges"], s["se_wedges"]),
    }


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------
@dataclass
class ConcavityPoint:
    alpha: float
    h: float
    n: int
    mode: str
    edge_density: float              # m_n = E[E_n] / n^2
    se: float = 0.0
    second_difference: float | None = None
    second_difference_se: float | None = None

    def to_record(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class ConcavityScan:
    points: list[ConcavityPoint]
    mode: str

    @property
    def passed(self) -> bool:
        """Exact: every second difference <= CONCAVITY_TOL. MCMC: increasing within 3 SE."""
        if self.mode == "exact":
            return all(
                p.second_difference is None or p.second_difference <= CONCAVITY_TOL for p in self.points
            )
        return all(
            b.edge_density - a.edge_density >= -3 * math.hypot(a.se, b.se)
            for a, b in zip(self.points, self.points[1:])
        )


def concavity_scan(
    alpha: float,
    hs: Iterable[float],
    n: int,
    mode: str = "exact",
    chain_template: ChainSpec | None = None,
) -> ConcavityScan:
    """
    m_n(alpha, h) along an equally spaced h grid with its second differences.

    Args:
        alpha: wedge coupling
        hs: equally spaced field values
        n: vertex count
        mode: "exact" (enumeration) or "mcmc" (chains built from ``chain_template``)
        chain_template: sweeps, burn-in, thinning, seed and chain count for mcmc mode
    """
    hs = list(hs)
    points = []
    for k, h in enumerate(hs):
        if mode == "exact":
            density = statistic_moments(build_system(n, ScalarParams(alpha, h)))["mean_edges"] / n ** 2
            points.append(ConcavityPoint(alpha=alpha, h=h, n=n, mode=mode, edge_density=density))
        elif mode == "mcmc":
            template = chain_template or ChainSpec(n=n, alpha=alpha, h=h, sweeps=DEFAULT_BURN_IN * 2)
            spec = ChainSpec(**{**asdict(template), "n": n, "alpha": alpha, "h": h, "seed": template.seed + k})
            s = run_chains(spec).stats
            points.append(ConcavityPoint(
                alpha=alpha, h=h, n=n, mode=mode,
                edge_density=s["mean_edges"] / n ** 2, se=s["se_edges"] / n ** 2,
            ))
        else:
            raise ValueError(f"mode must be exact or mcmc, got {mode!r}")
    for k in range(1, len(points) - 1):
        a, b, c = points[k - 1], points[k], points[k + 1]
        b.second_difference = a.edge_density - 2 * b.edge_density + c.edge_density
        if mode == "mcmc":
            b.second_difference_se = math.sqrt(a.se ** 2 + 4 * b.se ** 2 + c.se ** 2)
    logger.info("Concavity scan finished: alpha=%g n=%d mode=%s points=%d", alpha, n, mode, len(points))
    return ConcavityScan(points=points, mode=mode)


@dataclass
class CoexistenceHistogram:
    alpha: float
    h: float
    bin_edges: np.ndarray
    counts: np.ndarray
    maximizers: tuple[float, ...]
    mean_from_empty: float
    mean_from_full: float

    def to_records(self) -> list[dict[str, Any]]:
        return [
            {"alpha": self.alpha, "h": self.h, "bin_low": float(lo), "bin_high": float(hi), "count": int(c)}
            for lo, hi, c in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts)
        ]


def coexistence_histogram(
    alpha: float, n: int, sweeps: int, chains: int = 4, seed: int = 0,
    burn_in: int = DEFAULT_BURN_IN, thinning: int = DEFAULT_THINNING, bins: int = 50,
) -> CoexistenceHistogram:
    """
    Pooled edge-probability histogram on the coexistence curve h = q(alpha).

    Half of the runs start from the empty graph, half from the complete
    graph. Exploratory: no target mixture weight is known.
    """
    q = critical_curve(alpha).q
    runs = {
        init: run_chains(ChainSpec(
            n=n, alpha=alpha, h=q, sweeps=sweeps, burn_in=burn_in, thinning=thinning,
            seed=seed + offset, chains=chains, init=init,
        ))
        for offset, init in enumerate(("empty", "full"))
    }
    m = n * (n - 1) // 2
    pooled = np.concatenate([r.edges.ravel() / m for r in runs.values()])
    counts, bin_edges = np.histogram(pooled, bins=bins, range=(0.0, 1.0))
    return CoexistenceHistogram(
        alpha=alpha,
        h=q,
        bin_edges=bin_edges,
        counts=counts,
        maximizers=classify(alpha, q).maximizers,
        mean_from_empty=runs["empty"].stats["mean_edge_prob"],
        mean_from_full=runs["full"].stats["mean_edge_prob"],
    )

"""
Exact Gibbs computations by full enumeration of edge configurations.

Configurations supported on the active subset A are visited in ascending
mask order (bit k of the mask is the occupancy of the k-th active edge),
in chunks of 2^16. Per-chunk partial sums are merged with math.fsum in
chunk order, so results do not depend on the number of worker threads.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any

import numpy as np
from scipy.special import expit

from graph_core import Config, EdgeIndexing, WedgeList, build_edge_index, wedge_list
from hamiltonians import ErgmParams, GeneralizedParams, Hamiltonian, Params, ScalarParams, get_hamiltonian

logger = logging.getLogger("twostar-lab.exact")

# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------
ENUMERATION_CAP = 24   # active edges; 2^24 configurations
DENSE_CAP = 20         # largest active set for which full probability tables are built
CHUNK_BITS = 16
NORMALIZATION_TOL = 1e-12

Observable = Callable[[np.ndarray], np.ndarray]


class EnumerationCapError(ValueError):
    """The active edge set is too large for exhaustive enumeration."""


class SupportError(ValueError):
    """A configuration or monomial reaches outside the active edge set."""


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ExactSystem:
    """Active edge subset of K_n, its parameters, and the cached log-partition."""
    idx: EdgeIndexing
    params: Params
    active: tuple[int, ...]
    scale_n: int
    cap: int = ENUMERATION_CAP
    workers: int = 1
    wedges: WedgeList = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "wedges", wedge_list(self.idx))
        if any(not 0 <= i < self.idx.m for i in self.active):
            raise SupportError(f"active edges must lie in [0, {self.idx.m})")

    @property
    def n(self) -> int:
        return self.idx.n

    @property
    def k(self) -> int:
        return len(self.active)

    @cached_property
    def hamiltonian(self) -> Hamiltonian:
        return get_hamiltonian(self.params, self.idx, self.active, self.scale_n)

    @cached_property
    def log_z(self) -> float:
        return _log_partition(self)

    def param_record(self) -> dict[str, Any]:
        record = {"n": self.n, "active": len(self.active)}
        record.update(self.params.as_record())
        return record


def build_system(
    n: int,
    params: Params,
    active: Iterable[int] | None = None,
    cap: int = ENUMERATION_CAP,
    workers: int = 1,
) -> ExactSystem:
    """
    Create an exact system on K_n.

    Args:
        n: vertex count
        params: scalar, generalized or ERGM parameters
        active: edge subset A (default: all edges)
        cap: largest |A| accepted by log_partition
        workers: threads used for chunked enumeration

    Returns:
        ExactSystem with lazily computed log_Z
    """
    idx = build_edge_index(n)
    if isinstance(params, GeneralizedParams):
        params.validate(idx)
    act = tuple(range(idx.m)) if active is None else tuple(sorted(set(active)))
    return ExactSystem(idx=idx, params=params, active=act, scale_n=n, cap=cap, workers=workers)


def restrict(sys: ExactSystem, A: Iterable[int]) -> ExactSystem:
    """Subsystem on A: wedges W_A, fields on A, same 1/n scale."""
    sub = tuple(sorted(set(A)))
    extra = set(sub) - set(sys.active)
    if extra:
        raise SupportError(f"edges {sorted(extra)} are not active in the parent system")
    return replace(sys, active=sub)


def with_params(sys: ExactSystem, params: Params) -> ExactSystem:
    return replace(sys, params=params)


def field_shifted(sys: ExactSystem, dh: float) -> ExactSystem:
    """Same system with every edge field moved by dh."""
    p = sys.params
    if isinstance(p, ScalarParams):
        return with_params(sys, ScalarParams(p.alpha, p.h + dh))
    if isinstance(p, GeneralizedParams):
        return with_params(sys, p.shifted_field(dh))
    raise ValueError("field shifts are defined for two-star parameters only")


def alpha_shifted(sys: ExactSystem, d_alpha: float) -> ExactSystem:
    """Same system with every wedge coupling moved by d_alpha."""
    p = sys.params
    if isinstance(p, ScalarParams):
        return with_params(sys, ScalarParams(p.alpha + d_alpha, p.h))
    if isinstance(p, GeneralizedParams):
        return with_params(sys, p.shifted_alpha(d_alpha))
    raise ValueError("coupling shifts are defined for two-star parameters only")


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------
def _check_cap(sys: ExactSystem) -> None:
    if sys.k > sys.cap:
        raise EnumerationCapError(
            f"{sys.k} active edges exceed the enumeration cap of {sys.cap}; "
            "use the mcmc module (run_chains) for systems of this size"
        )


def _chunk_ranges(k: int) -> list[tuple[int, int]]:
    total = 1 << k
    step = 1 << CHUNK_BITS
    return [(lo, min(lo + step, total)) for lo in range(0, total, step)]


def masks_to_bits(sys: ExactSystem, masks: np.ndarray) -> np.ndarray:
    """Full-width bits (len(masks), m) for an array of local masks."""
    masks = np.asarray(masks, dtype=np.int64)
    local = ((masks[:, None] >> np.arange(sys.k, dtype=np.int64)) & 1).astype(np.uint8)
    bits = np.zeros((len(masks), sys.idx.m), dtype=np.uint8)
    if sys.k:
        bits[:, list(sys.active)] = local
    return bits


def config_block(sys: ExactSystem, lo: int, hi: int) -> np.ndarray:
    """Full-width bits (hi - lo, m) for local masks lo..hi-1."""
    return masks_to_bits(sys, np.arange(lo, hi, dtype=np.int64))


def _map_chunks(sys: ExactSystem, fn: Callable[[np.ndarray, np.ndarray], Any]) -> list[Any]:
    """Apply fn(bits, energies) to every chunk; results in chunk order."""
    _check_cap(sys)
    ranges = _chunk_ranges(sys.k)
    ham = sys.hamiltonian

    def run(bounds: tuple[int, int]) -> Any:
        bits = config_block(sys, *bounds)
        return fn(bits, ham.energies(bits))

    if sys.workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=sys.workers) as pool:
            return list(pool.map(run, ranges))
    return [run(r) for r in ranges]


def _log_partition(sys: ExactSystem) -> float:
    if sys.k > 20:
        logger.info("Enumerating 2^%d configurations (n=%d)", sys.k, sys.n)
    peak = max(_map_chunks(sys, lambda _, e: float(e.max())))
    partials = _map_chunks(sys, lambda _, e: float(np.sum(np.exp(e - peak))))
    value = peak + math.log(math.fsum(partials))
    if not math.isfinite(value):
        raise ArithmeticError(f"log-partition is not finite ({value})")
    return value


def log_partition(sys: ExactSystem) -> float:
    """ln sum over configs supported on A of exp H(x)."""
    return sys.log_z


def free_energy(sys: ExactSystem) -> float:
    """f_n = ln Z / n^2."""
    return sys.log_z / sys.n ** 2


def hamiltonian(c: Config, sys: ExactSystem) -> float:
    if c.n != sys.n:
        raise SupportError(f"config lives on K_{c.n}, system on K_{sys.n}")
    outside = set(c.edges()) - set(sys.active)
    if outside:
        raise SupportError(f"config uses inactive edges {sorted(outside)}")
    return float(sys.hamiltonian.energies(c.as_array()[None, :])[0])


# ---------------------------------------------------------------------------
# Observables and expectations
# ---------------------------------------------------------------------------
def monomial(edges: Iterable[int]) -> Observable:
    """x_A = prod_{i in A} x_i as a vectorised observable (x_empty = 1)."""
    cols = sorted(set(edges))

    def obs(bits: np.ndarray) -> np.ndarray:
        if not cols:
            return np.ones(len(bits))
        return np.all(bits[:, cols] == 1, axis=1).astype(np.float64)

    return obs


def config_observable(fn: Callable[[Config], float], n: int) -> Observable:
    """Lift a Config -> float function to a batch observable."""

    def obs(bits: np.ndarray) -> np.ndarray:
        return np.array([fn(Config.from_array(n, row)) for row in bits], dtype=np.float64)

    return obs


def as_observable(sys: ExactSystem, obs) -> Observable:
    """Monomial edge iterable or batch callable -> batch callable."""
    if callable(obs):
        return obs
    edges = set(obs)
    outside = edges - set(sys.active)
    if outside:
        raise SupportError(f"monomial uses inactive edges {sorted(outside)}")
    return monomial(edges)


def expectation(sys: ExactSystem, obs) -> float:
    """
    E[obs] under the Gibbs measure of ``sys``.

    Args:
        sys: exact system
        obs: iterable of edge ids (monomial x_A) or a batch observable

    Returns:
        expectation value
    """
    fn = as_observable(sys, obs)
    log_z = sys.log_z
    partials = _map_chunks(sys, lambda b, e: float(np.sum(fn(b) * np.exp(e - log_z))))
    return math.fsum(partials)


def edge_occurrence_rhs(sys: ExactSystem, i: int) -> float:
    """
    E[(1 + exp(-gain_i(x)))^-1], gain_i = H(x, x_i=1) - H(x, x_i=0).

    For two-star parameters the gain is the local field
    (1/n) sum_{j ~ i} alpha_ij x_j + h_i.
    """
    if i not in sys.active:
        raise SupportError(f"edge {i} is not active")
    ham = sys.hamiltonian
    return expectation(sys, lambda bits: expit(ham.flip_gain(bits, i)))


# ---------------------------------------------------------------------------
# Dense tables (small systems)
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class DenseTable:
    """All configurations of a small system with their probabilities."""
    bits: np.ndarray         # (2^k, m) uint8, ascending local mask order
    energies: np.ndarray     # (2^k,)
    probs: np.ndarray        # (2^k,)
    superset: np.ndarray     # superset[S] = E[x_S], S a local mask


_DENSE_CACHE_ATTR = "_dense_table"


def dense_table(sys: ExactSystem) -> DenseTable:
    """Probability table, cached on the system; requires |A| <= DENSE_CAP."""
    cached = sys.__dict__.get(_DENSE_CACHE_ATTR)
    if cached is not None:
        return cached
    if sys.k > DENSE_CAP:
        raise EnumerationCapError(f"{sys.k} active edges exceed the dense-table cap of {DENSE_CAP}")
    bits = config_block(sys, 0, 1 << sys.k)
    energies = sys.hamiltonian.energies(bits)
    probs = np.exp(energies - sys.log_z)
    superset = probs.copy()
    for j in range(sys.k):
        view = superset.reshape(-1, 2, 1 << j)
        view[:, 0, :] += view[:, 1, :]
    table = DenseTable(bits=bits, energies=energies, probs=probs, superset=superset)
    sys.__dict__[_DENSE_CACHE_ATTR] = table
    return table


def local_mask(sys: ExactSystem, edges: Iterable[int]) -> int:
    """Bit mask of ``edges`` in the local (active-position) numbering."""
    pos = {e: k for k, e in enumerate(sys.active)}
    mask = 0
    for e in edges:
        if e not in pos:
            raise SupportError(f"edge {e} is not active")
        mask |= 1 << pos[e]
    return mask


def monomial_mean(sys: ExactSystem, edges: Iterable[int]) -> float:
    """E[x_A] from the dense superset-sum table."""
    return float(dense_table(sys).superset[local_mask(sys, edges)])


def normalization_error(sys: ExactSystem) -> float:
    if sys.k <= DENSE_CAP:
        return abs(math.fsum(dense_table(sys).probs) - 1.0)
    total = math.fsum(_map_chunks(sys, lambda _, e: float(np.sum(np.exp(e - sys.log_z)))))
    return abs(total - 1.0)


def statistic_moments(sys: ExactSystem) -> dict[str, float]:
    """Means and variances of the edge count and the wedge statistic."""
    wi, wj = sys.wedges.as_arrays()

    def stats(bits: np.ndarray, energies: np.ndarray) -> np.ndarray:
        x = bits.astype(np.float64)
        e = x.sum(axis=1)
        w = (x[:, wi] * x[:, wj]).sum(axis=1) if len(wi) else np.zeros(len(x))
        p = np.exp(energies - sys.log_z)
        return np.array([p @ e, p @ e ** 2, p @ w, p @ w ** 2])

    parts = _map_chunks(sys, stats)
    s = [math.fsum(part[c] for part in parts) for c in range(4)]
    return {
        "mean_edges": s[0],
        "var_edges": max(s[1] - s[0] ** 2, 0.0),
        "mean_wedges": s[2],
        "var_wedges": max(s[3] - s[2] ** 2, 0.0),
    }

"""
Combinatorics of the complete graph K_n.

Edges of K_n are numbered 0..m-1 in lexicographic order of their endpoint
pairs (u, v), u < v. A configuration is an occupancy bit-vector over those
edge ids. Everything here is immutable and safe to share between threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class UnsupportedPatternError(ValueError):
    """Raised when a homomorphism count is requested for an unknown pattern."""


# ---------------------------------------------------------------------------
# Edge indexing
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class EdgeIndexing:
    """Bijection between vertex pairs of K_n and edge ids."""
    n: int
    pairs: tuple[tuple[int, int], ...]
    _ids: dict[tuple[int, int], int] = field(default_factory=dict, compare=False, repr=False)

    @property
    def m(self) -> int:
        return len(self.pairs)

    def pair_of(self, i: int) -> tuple[int, int]:
        return self.pairs[i]

    def id_of(self, u: int, v: int) -> int:
        if u > v:
            u, v = v, u
        try:
            return self._ids[(u, v)]
        except KeyError:
            raise ValueError(f"({u}, {v}) is not an edge of K_{self.n}") from None

    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Endpoint arrays (u, v) indexed by edge id."""
        arr = np.array(self.pairs, dtype=np.int64).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]


@lru_cache(maxsize=64)
def build_edge_index(n: int) -> EdgeIndexing:
    """Lexicographic edge numbering of K_n; m = n(n-1)/2."""
    if n < 1:
        raise ValueError(f"vertex count must be >= 1, got {n}")
    pairs = tuple(itertools.combinations(range(n), 2))
    ids = {pair: i for i, pair in enumerate(pairs)}
    return EdgeIndexing(n=n, pairs=pairs, _ids=ids)


# ---------------------------------------------------------------------------
# Wedges and triangles
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class WedgeList:
    """Unordered pairs of distinct edges sharing exactly one vertex."""
    pairs: tuple[tuple[int, int], ...]
    partners: tuple[tuple[int, ...], ...]  # partners[i]: edges j with i ~ j

    def __len__(self) -> int:
        return len(self.pairs)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        arr = np.array(self.pairs, dtype=np.int64).reshape(-1, 2)
        return arr[:, 0], arr[:, 1]

    def restricted_to(self, active) -> WedgeList:
        """Wedges with both edges inside ``active`` (the set W_A)."""
        keep = frozenset(active)
        pairs = tuple(p for p in self.pairs if p[0] in keep and p[1] in keep)
        partners = tuple(
            tuple(j for j in row if j in keep) if i in keep else ()
            for i, row in enumerate(self.partners)
        )
        return WedgeList(pairs=pairs, partners=partners)


@lru_cache(maxsize=64)
def _wedges_for(n: int) -> WedgeList:
    idx = build_edge_index(n)
    pairs = []
    partners: list[list[int]] = [[] for _ in range(idx.m)]
    for i, j in itertools.combinations(range(idx.m), 2):
        shared = set(idx.pairs[i]) & set(idx.pairs[j])
        if len(shared) == 1:
            pairs.append((i, j))
            partners[i].append(j)
            partners[j].append(i)
    return WedgeList(pairs=tuple(pairs), partners=tuple(tuple(p) for p in partners))


def wedge_list(idx: EdgeIndexing) -> WedgeList:
    """All adjacent edge pairs (i, j), i < j, in lexicographic order."""
    return _wedges_for(idx.n)


@lru_cache(maxsize=64)
def _triangles_for(n: int) -> tuple[tuple[int, int, int], ...]:
    idx = build_edge_index(n)
    return tuple(
        (idx.id_of(a, b), idx.id_of(a, c), idx.id_of(b, c))
        for a, b, c in itertools.combinations(range(n), 3)
    )


def triangle_list(idx: EdgeIndexing) -> tuple[tuple[int, int, int], ...]:
    """Edge-id triples of the C(n,3) triangles of K_n."""
    return _triangles_for(idx.n)


# ---------------------------------------------------------------------------
# Configurations
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Config:
    """One graph on n labeled vertices as an occupancy vector over edge ids."""
    n: int
    bits: tuple[int, ...]

    def __post_init__(self):
        m = build_edge_index(self.n).m
        if len(self.bits) != m:
            raise ValueError(f"config length {len(self.bits)} != m = {m} for n = {self.n}")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("config bits must be 0 or 1")

    @classmethod
    def empty(cls, n: int) -> Config:
        return cls(n, (0,) * build_edge_index(n).m)

    @classmethod
    def full(cls, n: int) -> Config:
        return cls(n, (1,) * build_edge_index(n).m)

    @classmethod
    def from_edges(cls, n: int, edges) -> Config:
        bits = [0] * build_edge_index(n).m
        for i in edges:
            bits[i] = 1
        return cls(n, tuple(bits))

    @classmethod
    def from_array(cls, n: int, arr) -> Config:
        return cls(n, tuple(int(b) for b in arr))

    @property
    def indexing(self) -> EdgeIndexing:
        return build_edge_index(self.n)

    def as_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8)

    def edges(self) -> tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bits) if b)

    def relabel(self, perm) -> Config:
        """Image of this graph under the vertex permutation v -> perm[v]."""
        idx = self.indexing
        present = (idx.id_of(perm[u], perm[v]) for u, v in (idx.pairs[i] for i in self.edges()))
        return Config.from_edges(self.n, present)

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=np.int64)
        for i in self.edges():
            u, v = self.indexing.pairs[i]
            adj[u, v] = adj[v, u] = 1
        return adj


def edge_count(c: Config) -> int:
    return sum(c.bits)


def wedge_value(c: Config, w: WedgeList) -> int:
    """Number of wedge pairs {i, j} in ``w`` with both edges present."""
    return sum(1 for i, j in w.pairs if c.bits[i] and c.bits[j])


# ---------------------------------------------------------------------------
# Subgraph patterns and homomorphism densities
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SubgraphPattern:
    """A small simple graph H used as a sufficient statistic."""
    tag: str
    n_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v or not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"pattern {self.tag!r}: invalid edge ({u}, {v})")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"pattern {self.tag!r}: repeated edge {key}")
            seen.add(key)


EDGE = SubgraphPattern("edge", 2, ((0, 1),))
WEDGE = SubgraphPattern("wedge", 3, ((0, 1), (0, 2)))
TRIANGLE = SubgraphPattern("triangle", 3, ((0, 1), (0, 2), (1, 2)))

SUPPORTED_PATTERNS = {p.tag: p for p in (EDGE, WEDGE, TRIANGLE)}


def get_pattern(tag: str) -> SubgraphPattern:
    try:
        return SUPPORTED_PATTERNS[tag]
    except KeyError:
        raise UnsupportedPatternError(
            f"unsupported pattern {tag!r}; supported: {', '.join(SUPPORTED_PATTERNS)}"
        ) from None


def hom_count(H: SubgraphPattern, c: Config) -> int:
    """
    Count vertex maps V(H) -> V(G) that send every edge of H to an edge of G.

    Degenerate (non-injective) maps are included. Enumerates all n^|V(H)|
    maps, so it is meant for the small graphs this package works with.
    """
    if H.tag not in SUPPORTED_PATTERNS or SUPPORTED_PATTERNS[H.tag] != H:
        raise UnsupportedPatternError(f"unsupported pattern {H.tag!r}")
    adj = c.adjacency()
    count = 0
    for phi in itertools.product(range(c.n), repeat=H.n_vertices):
        if all(adj[phi[a], phi[b]] for a, b in H.edges):
            count += 1
    return count


def hom_density(H: SubgraphPattern, c: Config, n: int | None = None) -> float:
    """t(H, G) = |hom(H, G)| / n^|V(H)|."""
    if n is not None and n != c.n:
        raise ValueError(f"config lives on K_{c.n}, not K_{n}")
    return hom_count(H, c) / c.n ** H.n_vertices


def batch_hom_counts(H: SubgraphPattern, bits: np.ndarray, idx: EdgeIndexing) -> np.ndarray:
    """
    |hom(H, G)| for a batch of configurations, shape (N, m) -> (N,).

    Closed forms: 2E for the edge, 2W + 2E for the wedge (sum of squared
    degrees), 6T for the triangle.
    """
    if H.tag not in SUPPORTED_PATTERNS:
        raise UnsupportedPatternError(f"unsupported pattern {H.tag!r}")
    x = bits.astype(np.float64, copy=False)
    edges = x.sum(axis=1)
    if H.tag == "edge":
        return 2.0 * edges
    if H.tag == "wedge":
        wi, wj = wedge_list(idx).as_arrays()
        wedges = (x[:, wi] * x[:, wj]).sum(axis=1) if len(wi) else np.zeros(len(x))
        return 2.0 * wedges + 2.0 * edges
    tri = np.array(triangle_list(idx), dtype=np.int64).reshape(-1, 3)
    if not len(tri):
        return np.zeros(len(x))
    return 6.0 * (x[:, tri[:, 0]] * x[:, tri[:, 1]] * x[:, tri[:, 2]]).sum(axis=1)

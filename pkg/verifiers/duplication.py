"""
Duplicated variables for the two-star model.

A doubled state (x, y) of two independent copies is rewritten as
z = x - y in {-1, 0, 1} and v = (x + y)/2 in {0, 1/2, 1}. Since
x_i x_j + y_i y_j = z_i z_j / 2 + 2 v_i v_j, the doubled Hamiltonian splits
into a zero-field Ising part in z and a two-star part in v. Grouping doubled
states by the set A of coordinates where z = 0 gives sectors S_A; inside a
sector the z-part is an Ising system on the complement of A (couplings
alpha_ij / 2n) and the v-part is a two-star system on A with doubled
couplings, shifted fields and an additive constant c_A.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from gibbs_exact import EnumerationCapError, ExactSystem, dense_table, restrict, with_params
from graph_core import Config
from hamiltonians import GeneralizedParams, IsingHamiltonian, ScalarParams
from .inequalities import lattice_scan, ursell
from .reports import SLACK, IdentityReport, InequalityReport, NestingError

logger = logging.getLogger("twostar-lab.duplication")

# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------
DOUBLED_CAP = 10     # 4^10 doubled states
SECTOR_CAP = 12      # 2^12 sectors
P_LATTICE_EXHAUSTIVE_CAP = 8
P_LATTICE_SAMPLES = 200_000
DECOMPOSITION_TOL = 1e-12
MIXTURE_TOL = 1e-10
U3_TOL = 1e-12

ZVObservable = Callable[[np.ndarray], np.ndarray]


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DoubledState:
    x: Config
    y: Config

    def __post_init__(self):
        if self.x.n != self.y.n:
            raise ValueError("both copies must live on the same K_n")


@dataclass(frozen=True)
class ZVState:
    z: tuple[int, ...]


@dataclass(frozen=True)
class VVState:
    v: tuple[float, ...]


def to_zv(s: DoubledState) -> tuple[ZVState, VVState]:
    z = tuple(a - b for a, b in zip(s.x.bits, s.y.bits))
    v = tuple((a + b) / 2 for a, b in zip(s.x.bits, s.y.bits))
    return ZVState(z), VVState(v)


def sector_of(s: DoubledState) -> frozenset[int]:
    """The set A of coordinates with z_i = 0 (equivalently v_i in {0, 1})."""
    return frozenset(i for i, (a, b) in enumerate(zip(s.x.bits, s.y.bits)) if a == b)


def zv_monomial(edges: Iterable[int]) -> ZVObservable:
    """prod_{i in C} w_i for full-width z or v arrays; each index taken once."""
    cols = sorted(set(edges))

    def obs(w: np.ndarray) -> np.ndarray:
        if not cols:
            return np.ones(len(w))
        return np.prod(w[:, cols], axis=1)

    return obs


def _as_zv(obs) -> ZVObservable:
    return obs if callable(obs) else zv_monomial(obs)


def product(*factors) -> ZVObservable:
    """Pointwise product of z- or v-observables, e.g. z_i * z_j with i == j allowed."""
    fns = [_as_zv(f) for f in factors]

    def obs(w: np.ndarray) -> np.ndarray:
        out = np.ones(len(w))
        for fn in fns:
            out = out * fn(w)
        return out

    return obs


# ---------------------------------------------------------------------------
# Local layout of a two-star system
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class _Layout:
    params: GeneralizedParams
    positions: dict[int, int]
    wi: np.ndarray
    wj: np.ndarray
    alpha: np.ndarray
    h: np.ndarray


def _layout(sys: ExactSystem) -> _Layout:
    if isinstance(sys.params, ScalarParams):
        gp = sys.params.generalize(sys.idx)
    elif isinstance(sys.params, GeneralizedParams):
        gp = sys.params
    else:
        raise ValueError("duplication is defined for two-star parameters only")
    pos = {e: k for k, e in enumerate(sys.active)}
    pairs = [(i, j) for i, j in sys.wedges.pairs if i in pos and j in pos]
    return _Layout(
        params=gp,
        positions=pos,
        wi=np.array([pos[i] for i, _ in pairs], dtype=np.int64),
        wj=np.array([pos[j] for _, j in pairs], dtype=np.int64),
        alpha=np.array([gp.alpha_map[p] for p in pairs], dtype=np.float64),
        h=np.array([gp.h_vec[e] for e in sys.active], dtype=np.float64),
    )


def _require_cap(sys: ExactSystem, cap: int, what: str) -> None:
    if sys.k > cap:
        raise EnumerationCapError(f"{what} needs at most {cap} active edges, got {sys.k}")


def check_decomposition(sys: ExactSystem) -> IdentityReport:
    """H(x) + H(y) = H1(z) + H2(v) on every doubled state."""
    _require_cap(sys, DOUBLED_CAP, "the doubled enumeration")
    lay = _layout(sys)
    tab = dense_table(sys)
    local = tab.bits[:, list(sys.active)].astype(np.float64)
    n = sys.scale_n
    worst, witness = 0.0, (0, 0)
    for x in range(len(local)):
        z = local[x] - local
        v = (local[x] + local) / 2
        h1 = (z[:, lay.wi] * z[:, lay.wj]) @ lay.alpha / (2 * n)
        h2 = 2 * (v[:, lay.wi] * v[:, lay.wj]) @ lay.alpha / n + 2 * v @ lay.h
        err = np.abs(tab.energies[x] + tab.energies - h1 - h2)
        y = int(np.argmax(err))
        if err[y] > worst:
            worst, witness = float(err[y]), (x, y)
    return IdentityReport(
        tag="decomposition",
        params=sys.param_record(),
        max_error=worst,
        tolerance=DECOMPOSITION_TOL,
        witness=witness,
        checked=len(local) ** 2,
    )


# ---------------------------------------------------------------------------
# Sectors and mixture weights
# ---------------------------------------------------------------------------
def ising_subsystem(sys: ExactSystem, sites: Iterable[int]) -> IsingHamiltonian:
    """Zero-field Ising system on ``sites`` with beta_ij = alpha_ij / 2n on W_sites."""
    gp = _layout(sys).params
    keep = frozenset(sites)
    couplings = {
        (i, j): gp.alpha_map[(i, j)] / (2 * sys.scale_n)
        for i, j in sys.wedges.pairs if i in keep and j in keep
    }
    return IsingHamiltonian(tuple(sorted(keep)), couplings)


def shifted_two_star(sys: ExactSystem, A: Iterable[int]) -> tuple[ExactSystem, float]:
    """
    Two-star subsystem on A with alpha' = 2 alpha and
    h'_i = 2 h_i + (1/n) sum_{j in A^c, j ~ i} alpha_ij, plus the constant
    c_A = (1/2n) sum_{W_{A^c}} alpha_ij + sum_{i in A^c} h_i.
    """
    gp = _layout(sys).params
    A = frozenset(A)
    comp = frozenset(sys.active) - A
    n = sys.scale_n
    h_new = [2 * h for h in gp.h_vec]
    for i in A:
        h_new[i] += sum(gp.alpha_map[(min(i, j), max(i, j))] for j in sys.wedges.partners[i] if j in comp) / n
    shifted = GeneralizedParams(
        alpha_map={k: 2 * a for k, a in gp.alpha_map.items()}, h_vec=tuple(h_new),
    )
    constant = (
        math.fsum(gp.alpha_map[(i, j)] for i, j in sys.wedges.pairs if i in comp and j in comp) / (2 * n)
        + math.fsum(gp.h_vec[i] for i in comp)
    )
    return restrict(with_params(sys, shifted), A), constant


@dataclass(frozen=True, eq=False)
class Sector:
    """The doubled states with z = 0 exactly on ``edges``."""
    mask: int
    edges: frozenset[int]
    ising: IsingHamiltonian
    shifted: ExactSystem
    constant: float
    log_weight: float

    @property
    def weight(self) -> float:
        return math.exp(self.log_weight)


def build_sector(sys: ExactSystem, A: Iterable[int]) -> Sector:
    A = frozenset(A)
    comp = frozenset(sys.active) - A
    ising = ising_subsystem(sys, comp)
    shifted, constant = shifted_two_star(sys, A)
    log_weight = ising.log_partition() + constant + shifted.log_z - 2 * sys.log_z
    mask = sum(1 << k for k, e in enumerate(sys.active) if e in A)
    return Sector(mask=mask, edges=A, ising=ising, shifted=shifted, constant=constant, log_weight=log_weight)


@dataclass(frozen=True, eq=False)
class MixtureWeights:
    """P(A) for every subset A of the active edges, indexed by local mask."""
    system: ExactSystem
    sectors: tuple[Sector, ...]

    @property
    def probs(self) -> np.ndarray:
        return np.array([s.weight for s in self.sectors])

    @property
    def log_probs(self) -> np.ndarray:
        return np.array([s.log_weight for s in self.sectors])

    def total(self) -> float:
        return math.fsum(s.weight for s in self.sectors)

    def of(self, A: Iterable[int]) -> float:
        A = frozenset(A)
        mask = sum(1 << k for k, e in enumerate(self.system.active) if e in A)
        return self.sectors[mask].weight


def mixture_weights(sys: ExactSystem) -> MixtureWeights:
    """
    P(A) = Z^Is_{A^c} exp(c_A) Z'_A / Z^2 for every A.

    The constant c_A is kept so the weights sum to one.
    """
    _require_cap(sys, SECTOR_CAP, "the sector sum")
    _layout(sys)

    def build(mask: int) -> Sector:
        return build_sector(sys, _mask_edges(sys, mask))

    masks = range(1 << sys.k)
    if sys.workers > 1:
        with ThreadPoolExecutor(max_workers=sys.workers) as pool:
            sectors = tuple(pool.map(build, masks))
    else:
        sectors = tuple(build(mask) for mask in masks)
    weights = MixtureWeights(system=sys, sectors=sectors)
    logger.debug("Built %d sectors, total weight %.15f", len(sectors), weights.total())
    return weights


def sector_ising_mean(sys: ExactSystem, sector: Sector, phi) -> float:
    """f^phi(A): Ising average of phi(z), z = 0 on A."""
    fn = _as_zv(phi)
    spins, probs = sector.ising.probabilities()
    z = np.zeros((len(spins), sys.idx.m))
    if sector.ising.size:
        z[:, list(sector.ising.sites)] = spins
    return math.fsum(probs * fn(z))


def sector_two_star_mean(sys: ExactSystem, sector: Sector, psi) -> float:
    """g^psi(A): shifted two-star average of psi(v), v = 1/2 off A."""
    fn = _as_zv(psi)
    tab = dense_table(sector.shifted)
    v = tab.bits.astype(np.float64)
    comp = sorted(frozenset(sys.active) - sector.edges)
    if comp:
        v[:, comp] = 0.5
    return math.fsum(tab.probs * fn(v))


def mixture_expectation(sys: ExactSystem, phi, psi, weights: MixtureWeights | None = None) -> float:
    """E(phi(z) psi(v)) = sum_A P(A) f^phi(A) g^psi(A)."""
    weights = weights or mixture_weights(sys)
    return math.fsum(
        s.weight * sector_ising_mean(sys, s, phi) * sector_two_star_mean(sys, s, psi)
        for s in weights.sectors
    )


# ---------------------------------------------------------------------------
# Direct doubled enumeration
# ---------------------------------------------------------------------------
def doubled_expectations(sys: ExactSystem, pairs: list[tuple]) -> list[float]:
    """E(phi(z) psi(v)) under mu x mu for each (phi, psi), by one pass over 4^k states."""
    _require_cap(sys, DOUBLED_CAP, "the doubled enumeration")
    fns = [(_as_zv(phi), _as_zv(psi)) for phi, psi in pairs]
    tab = dense_table(sys)
    bits = tab.bits.astype(np.float64)
    partials: list[list[float]] = [[] for _ in fns]
    for x in range(len(bits)):
        z = bits[x] - bits
        v = (bits[x] + bits) / 2
        w = tab.probs[x] * tab.probs
        for acc, (phi, psi) in zip(partials, fns):
            acc.append(float(np.sum(w * phi(z) * psi(v))))
    return [math.fsum(acc) for acc in partials]


def doubled_expectation(sys: ExactSystem, phi, psi) -> float:
    return doubled_expectations(sys, [(phi, psi)])[0]


# ---------------------------------------------------------------------------
# Verifiers
# ---------------------------------------------------------------------------
ONE: tuple[int, ...] = ()


def verify_zv_inequalities(sys: ExactSystem, C: Iterable[int], D: Iterable[int]) -> InequalityReport:
    """
    E(z_C z_D) >= E(z_C) E(z_D) and E(z_C v_D) <= E(z_C) E(v_D).

    The report's violation is the worse of the two.
    """
    C, D = frozenset(C), frozenset(D)
    zc, zd, zcd, vd, zcvd = doubled_expectations(sys, [
        (C, ONE), (D, ONE), (product(C, D), ONE), (ONE, D), (C, D),
    ])
    first = zc * zd - zcd
    second = zcvd - zc * vd
    return InequalityReport(
        tag="zv",
        params=sys.param_record(),
        worst_violation=max(first, second),
        witness=(C, D),
        checked=2,
        extra={"zz_violation": first, "zv_violation": second},
    )


def verify_u3_representation(sys: ExactSystem, i: int, j: int, k: int) -> IdentityReport:
    """u3(i,j,k) = E(z_i z_j v_k) - E(z_i z_j) E(v_k)."""
    zz = product((i,), (j,))
    zzv, zz_mean, v_mean = doubled_expectations(sys, [(zz, (k,)), (zz, ONE), (ONE, (k,))])
    represented = zzv - zz_mean * v_mean
    direct = ursell(sys, (i, j, k)).value
    return IdentityReport(
        tag="u3-repr",
        params=sys.param_record(),
        max_error=abs(represented - direct),
        tolerance=U3_TOL,
        witness=(i, j, k),
        checked=1,
        extra={"u3": direct, "represented": represented},
    )


def verify_u3_representation_all(sys: ExactSystem) -> IdentityReport:
    """The representation over all ordered triples of active edges."""
    triples = [(i, j, k) for i in sys.active for j in sys.active for k in sys.active]
    worst: IdentityReport | None = None
    for t in triples:
        report = verify_u3_representation(sys, *t)
        if worst is None or report.max_error > worst.max_error:
            worst = report
    if worst is None:
        return IdentityReport(tag="u3-repr", params=sys.param_record(), max_error=0.0, tolerance=U3_TOL)
    worst.checked = len(triples)
    return worst


def verify_sector_monotonicity(
    sys: ExactSystem, C: Iterable[int], D: Iterable[int], A: Iterable[int], B: Iterable[int],
) -> InequalityReport:
    """f^{z_C}(B) <= f^{z_C}(A) and g^{v_D}(A) <= g^{v_D}(B) for A ⊆ B."""
    A, B = frozenset(A), frozenset(B)
    if not A <= B <= frozenset(sys.active):
        raise NestingError("sector monotonicity needs A ⊆ B ⊆ active edges")
    C, D = frozenset(C), frozenset(D)
    sa, sb = build_sector(sys, A), build_sector(sys, B)
    fa, fb = sector_ising_mean(sys, sa, C), sector_ising_mean(sys, sb, C)
    ga, gb = sector_two_star_mean(sys, sa, D), sector_two_star_mean(sys, sb, D)
    return InequalityReport(
        tag="sector-mono",
        params=sys.param_record(),
        worst_violation=max(fb - fa, ga - gb),
        witness=(A, B),
        checked=2,
        extra={"f_small": fa, "f_large": fb, "g_small": ga, "g_large": gb},
    )


def verify_P_lattice(weights: MixtureWeights, samples: int = P_LATTICE_SAMPLES, seed: int = 0) -> InequalityReport:
    """P(E) P(F) <= P(E|F) P(E&F), compared in log space."""
    sys = weights.system
    log_p = weights.log_probs
    if sys.k <= P_LATTICE_EXHAUSTIVE_CAP:
        worst, (e, f), checked = lattice_scan(log_p, sys.k)
        mode = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        es = rng.integers(0, 1 << sys.k, size=samples, dtype=np.int64)
        fs = rng.integers(0, 1 << sys.k, size=samples, dtype=np.int64)
        viol = log_p[es] + log_p[fs] - log_p[es | fs] - log_p[es & fs]
        at = int(np.argmax(viol))
        worst, e, f, checked = float(viol[at]), int(es[at]), int(fs[at]), samples
        mode = "sampled"
    return InequalityReport(
        tag="p-lattice",
        params=sys.param_record(),
        worst_violation=worst,
        witness=(weights.sectors[e].edges, weights.sectors[f].edges),
        checked=checked,
        extra={"mode": mode, "total_weight": weights.total()},
    )


def _mask_edges(sys: ExactSystem, mask: int) -> frozenset[int]:
    return frozenset(e for k, e in enumerate(sys.active) if mask >> k & 1)


def ising_log_partitions(sys: ExactSystem) -> np.ndarray:
    """ln Z^Is_S for every subset S of the active set, indexed by local mask."""
    _require_cap(sys, SECTOR_CAP, "the Ising sweep")
    return np.array([
        ising_subsystem(sys, _mask_edges(sys, mask)).log_partition()
        for mask in range(1 << sys.k)
    ])


def verify_ising_submodularity(
    sys: ExactSystem, E: Iterable[int] | None = None, F: Iterable[int] | None = None,
) -> InequalityReport:
    """
    ln Z^Is_E + ln Z^Is_F <= ln Z^Is_{E|F} + ln Z^Is_{E&F} for the zero-field
    Ising systems with couplings alpha_ij / 2n; all subset pairs when E, F are omitted.
    """
    if E is None or F is None:
        log_z = ising_log_partitions(sys)
        worst, (e, f), checked = lattice_scan(log_z, sys.k)
        witness = (_mask_edges(sys, e), _mask_edges(sys, f))
    else:
        E, F = frozenset(E), frozenset(F)

        def log_z_of(S: frozenset[int]) -> float:
            return ising_subsystem(sys, S).log_partition()

        worst = log_z_of(E) + log_z_of(F) - log_z_of(E | F) - log_z_of(E & F)
        witness, checked = (E, F), 1
    return InequalityReport(
        tag="ising-submod",
        params=sys.param_record(),
        worst_violation=worst,
        witness=witness,
        checked=checked,
        slack=SLACK,
    )

"""
Ursell functions and correlation-inequality verifiers on exact systems.

All moments come from the dense superset-sum table of the system, so
E[x_A x_B] is a single lookup at the mask A | B.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass

import numpy as np

from gibbs_exact import (
    DENSE_CAP,
    EnumerationCapError,
    ExactSystem,
    SupportError,
    alpha_shifted,
    as_observable,
    dense_table,
    expectation,
    field_shifted,
    free_energy,
    local_mask,
    masks_to_bits,
    monomial_mean,
    restrict,
    statistic_moments,
    with_params,
)
from hamiltonians import GeneralizedParams, ScalarParams
from .reports import SLACK, IdentityReport, InequalityReport, MonotonicityError, NestingError, UrsellValue

logger = logging.getLogger("twostar-lab.inequalities")

# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------
GKS_SIZE_CAP = 3
FKG_EXHAUSTIVE_CAP = 12
FKG_SAMPLES = 200_000
MONOTONE_AUDIT_CAP = 8
SWEEP_CAP = 12
DERIVATIVE_CAP = 15
STENCIL_STEPS = {1: 1e-4, 2: 1e-3, 3: 1e-2}
STENCIL_TOLERANCES = {1: 1e-8, 2: 1e-6, 3: 1e-5}
SENSITIVITY_STEP = 1e-4
SENSITIVITY_TOL = 1e-6
DENSITY_TOL = 1e-8

# Fourth-order central stencils: (offsets, weights, divisor); f^(k) ~ sum w f(x + o d) / (divisor d^k)
_STENCILS = {
    1: ((-2, -1, 1, 2), (1, -8, 8, -1), 12.0),
    2: ((-2, -1, 0, 1, 2), (-1, 16, -30, 16, -1), 12.0),
    3: ((-3, -2, -1, 1, 2, 3), (1, -8, 13, -13, 8, -1), 8.0),
}


def central_derivative(fn: Callable[[float], float], x: float, order: int, step: float | None = None) -> float:
    """Derivative of order 1-3 of ``fn`` at ``x`` by a fourth-order central stencil."""
    if order not in _STENCILS:
        raise ValueError(f"stencils exist for orders 1-3, not {order}")
    offsets, weights, divisor = _STENCILS[order]
    step = step or STENCIL_STEPS[order]
    values = [fn(x + o * step) for o in offsets]
    return math.fsum(w * v for w, v in zip(weights, values)) / (divisor * step ** order)


def relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / max(1.0, abs(reference))


# ---------------------------------------------------------------------------
# Moments and Ursell functions
# ---------------------------------------------------------------------------
def _moment(sys: ExactSystem, edges: Iterable[int]) -> float:
    edges = frozenset(edges)
    if sys.k <= DENSE_CAP:
        return monomial_mean(sys, edges)
    return expectation(sys, edges)


def _edges_of(sys: ExactSystem, mask: int) -> frozenset[int]:
    return frozenset(e for k, e in enumerate(sys.active) if mask >> k & 1)


def ursell(sys: ExactSystem, indices: Iterable[int]) -> UrsellValue:
    """
    Joint cumulant u_l of the edge indicators at ``indices`` (l = 1, 2, 3).

    Repeated indices are allowed; x_i^2 = x_i on {0, 1}.
    """
    ids = tuple(indices)
    if not 1 <= len(ids) <= 3:
        raise ValueError(f"Ursell functions are supported for orders 1-3, got order {len(ids)}")
    missing = set(ids) - set(sys.active)
    if missing:
        raise SupportError(f"edges {sorted(missing)} are not active")

    def E(*edges: int) -> float:
        return _moment(sys, edges)

    if len(ids) == 1:
        value = E(*ids)
    elif len(ids) == 2:
        i, j = ids
        value = E(i, j) - E(i) * E(j)
    else:
        i, j, k = ids
        value = (
            E(i, j, k)
            - E(i, j) * E(k) - E(i, k) * E(j) - E(j, k) * E(i)
            + 2.0 * E(i) * E(j) * E(k)
        )
    return UrsellValue(order=len(ids), indices=ids, value=value)


@dataclass(frozen=True)
class UrsellTensors:
    """u1, u2, u3 over the active edges, indexed by active position."""
    active: tuple[int, ...]
    u1: np.ndarray
    u2: np.ndarray
    u3: np.ndarray


def ursell_tensors(sys: ExactSystem) -> UrsellTensors:
    if sys.k > DENSE_CAP:
        raise EnumerationCapError(f"Ursell tensors need at most {DENSE_CAP} active edges")
    E = dense_table(sys).superset
    bit = np.left_shift(1, np.arange(sys.k, dtype=np.int64))
    m1 = E[bit]
    m2 = E[bit[:, None] | bit[None, :]]
    m3 = E[bit[:, None, None] | bit[None, :, None] | bit[None, None, :]]
    u2 = m2 - m1[:, None] * m1[None, :]
    u3 = (
        m3
        - m2[:, :, None] * m1[None, None, :]
        - m2[:, None, :] * m1[None, :, None]
        - m2[None, :, :] * m1[:, None, None]
        + 2.0 * m1[:, None, None] * m1[None, :, None] * m1[None, None, :]
    )
    return UrsellTensors(active=sys.active, u1=m1, u2=u2, u3=u3)


def diagonal_identities(sys: ExactSystem) -> dict[str, float]:
    """
    Worst errors of the two diagonal cumulant identities.

    cube:  u3(i,i,i) = p_i (1 - p_i)(1 - 2 p_i)
    pair:  u3(i,i,k) = u2(i,k)(1 - 2 p_i), i != k
    """
    t = ursell_tensors(sys)
    p = t.u1
    diag = np.arange(sys.k)
    cube = np.abs(t.u3[diag, diag, diag] - p * (1 - p) * (1 - 2 * p))
    pair = np.abs(t.u3[diag, diag, :] - t.u2 * (1 - 2 * p)[:, None])
    pair[diag, diag] = 0.0
    return {
        "cube_error": float(cube.max(initial=0.0)),
        "pair_error": float(pair.max(initial=0.0)),
    }


# ---------------------------------------------------------------------------
# GKS and GHS
# ---------------------------------------------------------------------------
def verify_gks(sys: ExactSystem, A: Iterable[int], B: Iterable[int]) -> InequalityReport:
    """E[x_A x_B] >= E[x_A] E[x_B] for one pair of monomials."""
    A, B = frozenset(A), frozenset(B)
    violation = _moment(sys, A) * _moment(sys, B) - _moment(sys, A | B)
    return InequalityReport(
        tag="gks", params=sys.param_record(), worst_violation=violation, witness=(A, B), checked=1,
    )


def verify_gks_exhaustive(sys: ExactSystem, size_cap: int = GKS_SIZE_CAP) -> InequalityReport:
    """All ordered pairs of nonempty subsets A, B of the active set with |A|, |B| <= size_cap."""
    E = dense_table(sys).superset
    masks = np.array(
        [
            sum(1 << p for p in combo)
            for r in range(1, min(size_cap, sys.k) + 1)
            for combo in itertools.combinations(range(sys.k), r)
        ],
        dtype=np.int64,
    )
    if not len(masks):
        return InequalityReport(tag="gks", params=sys.param_record(), worst_violation=0.0)
    ea = E[masks]
    violation = ea[:, None] * ea[None, :] - E[masks[:, None] | masks[None, :]]
    a, b = np.unravel_index(int(np.argmax(violation)), violation.shape)
    return InequalityReport(
        tag="gks",
        params=sys.param_record(),
        worst_violation=float(violation[a, b]),
        witness=(_edges_of(sys, int(masks[a])), _edges_of(sys, int(masks[b]))),
        checked=violation.size,
        extra={"size_cap": size_cap},
    )


def verify_ghs(sys: ExactSystem, i: int, j: int, k: int) -> InequalityReport:
    """u3(i, j, k) <= 0."""
    u = ursell(sys, (i, j, k))
    return InequalityReport(
        tag="ghs", params=sys.param_record(), worst_violation=u.value, witness=(i, j, k), checked=1,
    )


def verify_ghs_exhaustive(sys: ExactSystem) -> InequalityReport:
    """u3 <= 0 over all ordered triples of active edges, repeats included."""
    t = ursell_tensors(sys)
    if not sys.k:
        return InequalityReport(tag="ghs", params=sys.param_record(), worst_violation=0.0)
    a, b, c = np.unravel_index(int(np.argmax(t.u3)), t.u3.shape)
    return InequalityReport(
        tag="ghs",
        params=sys.param_record(),
        worst_violation=float(t.u3[a, b, c]),
        witness=(sys.active[a], sys.active[b], sys.active[c]),
        checked=t.u3.size,
    )


# ---------------------------------------------------------------------------
# Lattice conditions
# ---------------------------------------------------------------------------
def lattice_scan(values: np.ndarray, k: int) -> tuple[float, tuple[int, int], int]:
    """
    Worst f(x) + f(y) - f(x|y) - f(x&y) over all ordered mask pairs.

    Returns:
        (worst violation, witnessing mask pair, number of pairs)
    """
    masks = np.arange(1 << k, dtype=np.int64)
    worst, witness = -math.inf, (0, 0)
    for x in range(1 << k):
        viol = values[x] + values - values[x | masks] - values[x & masks]
        y = int(np.argmax(viol))
        if viol[y] > worst:
            worst, witness = float(viol[y]), (x, y)
    return worst, witness, (1 << k) ** 2


def verify_fkg_lattice(sys: ExactSystem, samples: int = FKG_SAMPLES, seed: int = 0) -> InequalityReport:
    """
    mu(x|y) mu(x&y) >= mu(x) mu(y), compared through energies in log space.

    Exhaustive over all config pairs when |A| <= FKG_EXHAUSTIVE_CAP,
    otherwise over ``samples`` seeded random pairs.
    """
    if sys.k <= FKG_EXHAUSTIVE_CAP:
        energies = dense_table(sys).energies
        worst, (x, y), checked = lattice_scan(energies, sys.k)
        mode = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        xs = rng.integers(0, 1 << sys.k, size=samples, dtype=np.int64)
        ys = rng.integers(0, 1 << sys.k, size=samples, dtype=np.int64)
        ham = sys.hamiltonian

        def H(masks: np.ndarray) -> np.ndarray:
            return ham.energies(masks_to_bits(sys, masks))

        viol = H(xs) + H(ys) - H(xs | ys) - H(xs & ys)
        at = int(np.argmax(viol))
        worst, x, y, checked = float(viol[at]), int(xs[at]), int(ys[at]), samples
        mode = "sampled"
        logger.debug("FKG lattice check sampled %d pairs (seed %d)", samples, seed)
    return InequalityReport(
        tag="fkg-lattice",
        params=sys.param_record(),
        worst_violation=worst,
        witness=(_edges_of(sys, x), _edges_of(sys, y)),
        checked=checked,
        extra={"mode": mode},
    )


def _audit_increasing(values: np.ndarray, k: int, name: str) -> None:
    masks = np.arange(1 << k, dtype=np.int64)
    for j in range(k):
        lower = masks[(masks >> j & 1) == 0]
        drop = values[lower] - values[lower | (1 << j)]
        if drop.size and drop.max() > SLACK:
            at = int(lower[int(np.argmax(drop))])
            raise MonotonicityError(f"{name} decreases when edge position {j} is added to mask {at}")


def verify_fkg_monotone(sys: ExactSystem, f, g, declared: bool = False) -> InequalityReport:
    """
    E[f g] >= E[f] E[g] for increasing functionals f, g.

    Args:
        sys: exact system with at most DENSE_CAP active edges
        f, g: monomials (edge iterables) or batch observables
        declared: skip the audit and trust the caller's monotonicity claim

    Raises:
        MonotonicityError: f or g fails the audit, or the audit is out of
            reach (|A| > MONOTONE_AUDIT_CAP) and nothing was declared
    """
    tab = dense_table(sys)
    fv = np.asarray(as_observable(sys, f)(tab.bits), dtype=np.float64)
    gv = np.asarray(as_observable(sys, g)(tab.bits), dtype=np.float64)
    if declared:
        audit = "declared"
    elif sys.k <= MONOTONE_AUDIT_CAP:
        _audit_increasing(fv, sys.k, "f")
        _audit_increasing(gv, sys.k, "g")
        audit = "exhaustive"
    else:
        raise MonotonicityError(
            f"{sys.k} active edges exceed the audit cap of {MONOTONE_AUDIT_CAP}; pass declared=True"
        )
    p = tab.probs
    ef, eg, efg = math.fsum(p * fv), math.fsum(p * gv), math.fsum(p * fv * gv)
    return InequalityReport(
        tag="fkg",
        params=sys.param_record(),
        worst_violation=ef * eg - efg,
        checked=1,
        extra={"audit": audit, "covariance": efg - ef * eg},
    )


# ---------------------------------------------------------------------------
# Volume monotonicity and partition-function submodularity
# ---------------------------------------------------------------------------
def verify_volume_monotonicity(
    sys: ExactSystem, lam: Iterable[int], A: Iterable[int], B: Iterable[int],
) -> InequalityReport:
    """E_A[x_lam] <= E_B[x_lam] for lam ⊆ A ⊆ B, subsystems of ``sys``."""
    lam, A, B = frozenset(lam), frozenset(A), frozenset(B)
    if not (lam <= A <= B <= frozenset(sys.active)):
        raise NestingError("volume monotonicity needs lam ⊆ A ⊆ B ⊆ active edges")
    ea = _moment(restrict(sys, A), lam)
    eb = _moment(restrict(sys, B), lam)
    return InequalityReport(
        tag="vol-mono",
        params=sys.param_record(),
        worst_violation=ea - eb,
        witness=(lam, A, B),
        checked=1,
        extra={"mean_small": ea, "mean_large": eb},
    )


def _generalized(sys: ExactSystem) -> GeneralizedParams:
    if isinstance(sys.params, ScalarParams):
        return sys.params.generalize(sys.idx)
    if isinstance(sys.params, GeneralizedParams):
        return sys.params
    raise ValueError("coupling derivatives are defined for two-star parameters only")


def _joining_wedge(sys: ExactSystem, left: frozenset[int], right: frozenset[int]) -> tuple[int, int] | None:
    for i in sorted(left):
        for j in sys.wedges.partners[i]:
            if j in right:
                return (min(i, j), max(i, j))
    return None


def _submodularity_gap(sys: ExactSystem, E: frozenset[int], F: frozenset[int]) -> float:
    """ln Z_{E|F} + ln Z_{E&F} - ln Z_E - ln Z_F."""
    return (
        restrict(sys, E | F).log_z + restrict(sys, E & F).log_z
        - restrict(sys, E).log_z - restrict(sys, F).log_z
    )


def verify_partition_submodularity(
    sys: ExactSystem, E: Iterable[int], F: Iterable[int], with_derivative: bool = True,
) -> InequalityReport:
    """
    ln Z_E + ln Z_F <= ln Z_{E|F} + ln Z_{E&F}.

    The report carries L = ln Z_{E|F} + ln Z_{E&F} - ln Z_E - ln Z_F. When
    a wedge {i, j} joins E&F and F-E, it also carries dL/d alpha_ij by
    finite differences next to (1/n)(E_{E|F}[x_i x_j] - E_F[x_i x_j]).
    """
    E, F = frozenset(E), frozenset(F)
    L = _submodularity_gap(sys, E, F)
    extra: dict = {"L": L}
    wedge = _joining_wedge(sys, E & F, F - E) if with_derivative else None
    if wedge is not None and isinstance(sys.params, (ScalarParams, GeneralizedParams)):
        gp = _generalized(sys)
        a0 = gp.alpha_map[wedge]
        derivative = central_derivative(
            lambda a: _submodularity_gap(with_params(sys, gp.with_alpha(wedge, a)), E, F), a0, 1,
        )
        expected = (_moment(restrict(sys, E | F), wedge) - _moment(restrict(sys, F), wedge)) / sys.scale_n
        extra.update(wedge=wedge, dL_dalpha=derivative, dL_dalpha_expected=expected)
    return InequalityReport(
        tag="part-submod",
        params=sys.param_record(),
        worst_violation=-L,
        witness=(E, F),
        checked=1,
        extra=extra,
    )


def subset_log_partitions(sys: ExactSystem) -> np.ndarray:
    """ln Z_S for every subset S of the active set, indexed by local mask."""
    if sys.k > SWEEP_CAP:
        raise EnumerationCapError(f"subset sweeps need at most {SWEEP_CAP} active edges")
    # Configurations supported on S carry the same energy in the subsystem on S.
    table = dense_table(sys).energies.copy()
    for j in range(sys.k):
        view = table.reshape(-1, 2, 1 << j)
        view[:, 1, :] = np.logaddexp(view[:, 1, :], view[:, 0, :])
    return table


def sweep_partition_submodularity(sys: ExactSystem) -> InequalityReport:
    """Submodularity of ln Z_S over all ordered pairs of subsets of the active set."""
    log_z = subset_log_partitions(sys)
    worst, (e, f), checked = lattice_scan(log_z, sys.k)
    logger.debug("Swept %d subset pairs, worst %.3g", checked, worst)
    return InequalityReport(
        tag="part-submod",
        params=sys.param_record(),
        worst_violation=worst,
        witness=(_edges_of(sys, e), _edges_of(sys, f)),
        checked=checked,
        extra={"mode": "exhaustive"},
    )


# ---------------------------------------------------------------------------
# Derivative checks
# ---------------------------------------------------------------------------
def derivative_ursell_check(sys: ExactSystem, orders: Iterable[int] = (1, 2, 3)) -> list[IdentityReport]:
    """
    h-derivatives of ln Z against sums of Ursell functions.

    The order-l derivative equals the sum of u_l over all ordered l-tuples
    of active edges.
    """
    if not isinstance(sys.params, ScalarParams):
        raise ValueError("the derivative check needs scalar parameters")
    if sys.k > DERIVATIVE_CAP:
        raise EnumerationCapError(f"the derivative check needs at most {DERIVATIVE_CAP} active edges")
    t = ursell_tensors(sys)
    sums = {1: math.fsum(t.u1), 2: math.fsum(t.u2.ravel()), 3: math.fsum(t.u3.ravel())}
    reports = []
    for order in orders:
        fd = central_derivative(lambda d: field_shifted(sys, d).log_z, 0.0, order)
        reports.append(IdentityReport(
            tag=f"dh{order}",
            params=sys.param_record(),
            max_error=relative_error(fd, sums[order]),
            tolerance=STENCIL_TOLERANCES[order],
            checked=1,
            extra={"finite_difference": fd, "ursell_sum": sums[order], "step": STENCIL_STEPS[order]},
        ))
    return reports


def derivative_density_check(sys: ExactSystem) -> list[IdentityReport]:
    """d f/dh = E[E_n]/n^2 and d f/d alpha = E[W_n]/n^3 on the full edge set."""
    if sys.k != sys.idx.m:
        raise SupportError("density identities need the full edge set active")
    moments = statistic_moments(sys)
    n = sys.n
    checks = (
        ("df-dh", lambda d: free_energy(field_shifted(sys, d)), moments["mean_edges"] / n ** 2),
        ("df-dalpha", lambda d: free_energy(alpha_shifted(sys, d)), moments["mean_wedges"] / n ** 3),
    )
    reports = []
    for tag, fn, expected in checks:
        fd = central_derivative(fn, 0.0, 1)
        reports.append(IdentityReport(
            tag=tag,
            params=sys.param_record(),
            max_error=relative_error(fd, expected),
            tolerance=DENSITY_TOL,
            checked=1,
            extra={"finite_difference": fd, "expected": expected},
        ))
    return reports


def verify_alpha_sensitivity(
    sys: ExactSystem, lam: Iterable[int], wedge: tuple[int, int], delta: float = SENSITIVITY_STEP,
) -> IdentityReport:
    """
    d E_A[x_lam] / d alpha_ij = (1/n)(E[x_lam x_i x_j] - E[x_lam] E[x_i x_j]).

    Uses a two-point central difference with step ``delta`` on the system's
    own active set A.
    """
    lam = frozenset(lam)
    key = (min(wedge), max(wedge))
    local_mask(sys, key)
    gp = _generalized(sys)
    if key not in gp.alpha_map:
        raise ValueError(f"{key} is not a wedge")
    a0 = gp.alpha_map[key]

    def mean_at(a: float) -> float:
        return _moment(with_params(sys, gp.with_alpha(key, a)), lam)

    fd = (mean_at(a0 + delta) - mean_at(a0 - delta)) / (2 * delta)
    pair = frozenset(key)
    expected = (_moment(sys, lam | pair) - _moment(sys, lam) * _moment(sys, pair)) / sys.scale_n
    return IdentityReport(
        tag="alpha-sensitivity",
        params=sys.param_record(),
        max_error=abs(fd - expected),
        tolerance=SENSITIVITY_TOL,
        witness=(lam, key),
        checked=1,
        extra={"finite_difference": fd, "expected": expected},
    )

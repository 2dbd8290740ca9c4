"""Hamiltonian registry and factory."""

from __future__ import annotations

from graph_core import EdgeIndexing
from .base import ErgmParams, GeneralizedParams, Hamiltonian, HamiltonianContext, Params, ScalarParams
from .ergm import ErgmHamiltonian
from .two_star import TwoStarHamiltonian


def create_hamiltonian_registry() -> dict[str, type[Hamiltonian]]:
    """
    Map parameter kinds to Hamiltonian classes.

    Scalar two-star parameters are served by the generalized Hamiltonian
    with constant couplings.
    """
    registry: dict[str, type[Hamiltonian]] = {}
    registry[ScalarParams.kind] = TwoStarHamiltonian
    registry[GeneralizedParams.kind] = TwoStarHamiltonian
    registry[ErgmParams.kind] = ErgmHamiltonian
    return registry


_REGISTRY = create_hamiltonian_registry()


def get_hamiltonian(
    params: Params, idx: EdgeIndexing, active: tuple[int, ...], scale_n: int | None = None,
) -> Hamiltonian:
    """
    Build the Hamiltonian for ``params`` on the active subset of K_n.

    Args:
        params: scalar, generalized or ERGM parameters
        idx: edge indexing of the ambient K_n
        active: sorted edge ids the configurations live on
        scale_n: vertex count used in the 1/n coupling scale (default: idx.n)

    Returns:
        Hamiltonian instance
    """
    kind = getattr(params, "kind", None)
    if kind not in _REGISTRY:
        raise TypeError(f"no Hamiltonian registered for {type(params).__name__}")
    ctx = HamiltonianContext(idx=idx, active=tuple(active), scale_n=scale_n or idx.n)
    if isinstance(params, ScalarParams):
        params = params.generalize(idx)
    return _REGISTRY[kind](params, ctx)

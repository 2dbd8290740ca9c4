"""Two-star Hamiltonian with per-wedge couplings and per-edge fields."""

from __future__ import annotations

import numpy as np

from graph_core import wedge_list
from .base import GeneralizedParams, Hamiltonian, HamiltonianContext


class TwoStarHamiltonian(Hamiltonian):
    """
    H_A(x) = (1/n) sum_{{i,j} in W_A} alpha_ij x_i x_j + sum_{i in A} h_i x_i.

    n is the ambient vertex count even when A is a strict subset.
    """

    def __init__(self, params: GeneralizedParams, ctx: HamiltonianContext):
        super().__init__(ctx)
        params.validate(ctx.idx)
        self.params = params
        self.wedges = wedge_list(ctx.idx).restricted_to(ctx.active)
        wi, wj = self.wedges.as_arrays()
        self._wi = wi
        self._wj = wj
        self._alpha = np.array([params.alpha_map[p] for p in self.wedges.pairs], dtype=np.float64)
        self._active = np.array(ctx.active, dtype=np.int64)
        self._h = np.array([params.h_vec[i] for i in ctx.active], dtype=np.float64)

    def energies(self, bits: np.ndarray) -> np.ndarray:
        x = bits.astype(np.float64, copy=False)
        out = x[:, self._active] @ self._h if len(self._active) else np.zeros(len(x))
        if len(self._alpha):
            out = out + (x[:, self._wi] * x[:, self._wj]) @ self._alpha / self.n
        return out

    def is_ferromagnetic(self) -> bool:
        return bool(np.all(self._alpha >= 0))

    def local_field(self, bits: np.ndarray, i: int) -> np.ndarray:
        """(1/n) sum_{j ~ i, j in A} alpha_ij x_j + h_i; independent of x_i."""
        partners = self.wedges.partners[i]
        field = np.full(len(bits), self.params.h_vec[i], dtype=np.float64)
        if partners:
            alphas = np.array(
                [self.params.alpha_map[(min(i, j), max(i, j))] for j in partners], dtype=np.float64,
            )
            field += bits[:, list(partners)].astype(np.float64) @ alphas / self.n
        return field

    def flip_gain(self, bits: np.ndarray, i: int) -> np.ndarray:
        return self.local_field(bits, i)

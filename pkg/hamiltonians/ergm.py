"""General exponential random graph Hamiltonian over homomorphism densities."""

from __future__ import annotations

import numpy as np

from graph_core import batch_hom_counts
from .base import ErgmParams, Hamiltonian, HamiltonianContext


class ErgmHamiltonian(Hamiltonian):
    """H(G) = n^2 sum_j beta_j t(H_j, G), evaluated on configs supported on A."""

    def __init__(self, params: ErgmParams, ctx: HamiltonianContext):
        super().__init__(ctx)
        self.params = params

    def energies(self, bits: np.ndarray) -> np.ndarray:
        n = self.ctx.idx.n
        out = np.zeros(len(bits), dtype=np.float64)
        for pattern, beta in zip(self.params.patterns, self.params.betas):
            if beta == 0.0:
                continue
            counts = batch_hom_counts(pattern, bits, self.ctx.idx)
            out += beta * counts * float(n) ** (2 - pattern.n_vertices)
        return out

    def is_ferromagnetic(self) -> bool:
        return self.params.higher_betas_nonnegative

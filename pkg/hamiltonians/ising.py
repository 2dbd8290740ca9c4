"""Zero-field Ising system on a set of edges, spins in {-1, +1}."""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np
from scipy.special import logsumexp


def spin_table(k: int) -> np.ndarray:
    """All 2^k spin vectors in ascending mask order (bit j set -> spin +1)."""
    masks = np.arange(1 << k, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(k, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


class IsingHamiltonian:
    """
    H(s) = sum_{{i,j}} beta_ij s_i s_j over coupled pairs of ``sites``.

    Enumerated directly over {-1,+1}^sites; the 0/1 engine is not reused.
    """

    def __init__(self, sites: tuple[int, ...], couplings: Mapping[tuple[int, int], float]):
        self.sites = tuple(sites)
        self._pos = {s: k for k, s in enumerate(self.sites)}
        pairs = [(self._pos[i], self._pos[j], b) for (i, j), b in couplings.items()]
        self._ci = np.array([p[0] for p in pairs], dtype=np.int64)
        self._cj = np.array([p[1] for p in pairs], dtype=np.int64)
        self._beta = np.array([p[2] for p in pairs], dtype=np.float64)

    @property
    def size(self) -> int:
        return len(self.sites)

    def energies(self, spins: np.ndarray) -> np.ndarray:
        if not len(self._beta):
            return np.zeros(len(spins))
        s = spins.astype(np.float64, copy=False)
        return (s[:, self._ci] * s[:, self._cj]) @ self._beta

    def is_ferromagnetic(self) -> bool:
        return bool(np.all(self._beta >= 0))

    def enumerate(self) -> tuple[np.ndarray, np.ndarray]:
        """(spins, energies) over all 2^|sites| states."""
        spins = spin_table(self.size)
        return spins, self.energies(spins)

    def log_partition(self) -> float:
        _, energy = self.enumerate()
        return float(logsumexp(energy))

    def probabilities(self) -> tuple[np.ndarray, np.ndarray]:
        spins, energy = self.enumerate()
        return spins, np.exp(energy - logsumexp(energy))

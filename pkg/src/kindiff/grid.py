"""Uniform cell-centered grid on the slab (-L, L)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SlabGrid:
    half_length: float
    n_cells: int

    def __post_init__(self):
        if not self.half_length > 0.0:
            raise ValueError("half_length must be positive")
        if self.n_cells < 16:
            raise ValueError("need at least 16 cells")

    @property
    def h(self) -> float:
        return 2.0 * self.half_length / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return -self.half_length + (np.arange(self.n_cells) + 0.5) * self.h

    @property
    def faces(self) -> np.ndarray:
        return -self.half_length + np.arange(self.n_cells + 1) * self.h

    def l2(self, values) -> float:
        """Discrete L2 norm sqrt(h * sum values^2) of a cell field."""
        values = np.asarray(values, dtype=float)
        return float(np.sqrt(self.h * np.sum(values**2)))

    def phase_l2(self, f, weights) -> float:
        """Discrete L2 norm over cells x ordinates, sqrt(h sum_i sum_j w_j f_ij^2)."""
        f = np.asarray(f, dtype=float)
        return float(np.sqrt(self.h * np.sum(f**2 @ np.asarray(weights))))

"""Flat `key = value` configuration files and builders for problem objects.

Example::

    # reference oscillating run
    quadrature.family = gauss-legendre-uniform
    quadrature.n = 16
    sigma.kind = sinusoidal
    sigma.mean = 2.0
    sigma.amplitude = 1.0
    beta = 1.0
    epsilon = 0.05
    slab.half_length = 1.0
    source.kind = constant
    source.value = 1.0
    sweep.eps = 0.2, 0.1, 0.05, 0.025

Lines starting with `#` and blank lines are ignored; inline `#` comments are
stripped.  Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Callable

import numpy as np

from .harness import SweepConfig
from .scattering import (
    ScatteringProfile,
    constant_profile,
    profile_from_csv,
    sinusoidal_profile,
    two_phase_profile,
)
from .velocity import VelocityQuadrature, build_quadrature

KNOWN_KEYS = {
    "quadrature.family",
    "quadrature.n",
    "sigma.kind",
    "sigma.value",
    "sigma.mean",
    "sigma.amplitude",
    "sigma.period",
    "sigma.values",
    "sigma.fractions",
    "sigma.table_path",
    "sigma.bar",
    "beta",
    "epsilon",
    "slab.half_length",
    "source.kind",
    "source.value",
    "source.table_path",
    "grid.cells",
    "grid.cells_per_period",
    "grid.cells_per_eps_sq",
    "grid.min_cells",
    "grid.max_cells",
    "solver.tol",
    "solver.max_iter",
    "sweep.eps",
    "sweep.mode",
    "sweep.test_functions",
}


class Config:
    """Parsed key/value pairs with typed accessors."""

    def __init__(self, pairs: dict[str, str], origin: str = "<config>"):
        unknown = set(pairs) - KNOWN_KEYS
        if unknown:
            raise ValueError(f"{origin}: unknown keys {sorted(unknown)}")
        self.pairs = pairs
        self.origin = origin

    @classmethod
    def load(cls, path: str | Path) -> "Config":
        pairs: dict[str, str] = {}
        with open(path) as handle:
            for lineno, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected `key = value`, got {raw!r}")
                key, value = (part.strip() for part in line.split("=", 1))
                if not key or not value:
                    raise ValueError(f"{path}:{lineno}: empty key or value")
                if key in pairs:
                    raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
                pairs[key] = value
        return cls(pairs, origin=str(path))

    def has(self, key: str) -> bool:
        return key in self.pairs

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.pairs.get(key, default)

    def get_float(self, key: str, default: float | None = None) -> float | None:
        raw = self.pairs.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ValueError(f"{self.origin}: key {key!r}: not a number: {raw!r}") from exc

    def get_int(self, key: str, default: int | None = None) -> int | None:
        raw = self.pairs.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError as exc:
            raise ValueError(f"{self.origin}: key {key!r}: not an integer: {raw!r}") from exc

    def get_floats(self, key: str, default=None):
        raw = self.pairs.get(key)
        if raw is None:
            return default
        try:
            return tuple(float(part) for part in raw.split(","))
        except ValueError as exc:
            raise ValueError(f"{self.origin}: key {key!r}: not a number list: {raw!r}") from exc


def quadrature_from(cfg: Config) -> VelocityQuadrature:
    family = cfg.get("quadrature.family", "gauss-legendre-uniform")
    n = cfg.get_int("quadrature.n", 16)
    return build_quadrature(family, n)


def profile_from(cfg: Config) -> ScatteringProfile:
    kind = cfg.get("sigma.kind", "constant")
    if kind == "constant":
        return constant_profile(
            cfg.get_float("sigma.value", 2.0), period=cfg.get_float("sigma.period", 1.0)
        )
    if kind == "sinusoidal":
        return sinusoidal_profile(
            mean=cfg.get_float("sigma.mean", 2.0),
            amplitude=cfg.get_float("sigma.amplitude", 1.0),
            period=cfg.get_float("sigma.period", 2.0 * math.pi),
        )
    if kind == "two-phase":
        return two_phase_profile(
            values=cfg.get_floats("sigma.values", (1.0, 3.0)),
            fractions=cfg.get_floats("sigma.fractions", (0.5, 0.5)),
            period=cfg.get_float("sigma.period", 1.0),
        )
    if kind == "user-table":
        path = cfg.get("sigma.table_path")
        if path is None:
            raise ValueError(f"{cfg.origin}: sigma.kind=user-table needs sigma.table_path")
        return profile_from_csv(path, period=cfg.get_float("sigma.period"))
    raise ValueError(f"{cfg.origin}: unknown sigma.kind {kind!r}")


def _table_source(path: str) -> Callable:
    rows = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        next(reader, None)  # header
        for row in reader:
            if row and any(cell.strip() for cell in row):
                rows.append((float(row[0]), float(row[1])))
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two source samples")
    data = np.asarray(sorted(rows), dtype=float)
    return lambda x: np.interp(x, data[:, 0], data[:, 1])


def source_from(cfg: Config) -> Callable:
    kind = cfg.get("source.kind", "constant")
    if kind == "constant":
        value = cfg.get_float("source.value", 1.0)
        return lambda x: np.full_like(np.asarray(x, dtype=float), value)
    if kind == "gaussian-bump":
        return lambda x: np.exp(-np.asarray(x, dtype=float) ** 2 / 0.08)
    if kind == "user-table":
        path = cfg.get("source.table_path")
        if path is None:
            raise ValueError(f"{cfg.origin}: source.kind=user-table needs source.table_path")
        return _table_source(path)
    raise ValueError(f"{cfg.origin}: unknown source.kind {kind!r}")


def sweep_config_from(cfg: Config) -> SweepConfig:
    return SweepConfig(
        profile=profile_from(cfg),
        quadrature=quadrature_from(cfg),
        source=source_from(cfg),
        beta=cfg.get_float("beta", 1.0),
        half_length=cfg.get_float("slab.half_length", 1.0),
        eps_list=cfg.get_floats("sweep.eps", (0.2, 0.1, 0.05, 0.025)),
        cells_per_period=cfg.get_int("grid.cells_per_period", 16),
        cells_per_eps_sq=cfg.get_int("grid.cells_per_eps_sq", 16),
        min_cells=cfg.get_int("grid.min_cells", 64),
        max_cells=cfg.get_int("grid.max_cells", 2**22),
        tol=cfg.get_float("solver.tol", 1e-10),
        max_iter=cfg.get_int("solver.max_iter", 100_000),
        mode=cfg.get("sweep.mode", "weak-star"),
        sigma_bar=cfg.get_float("sigma.bar"),
        n_test_functions=cfg.get_int("sweep.test_functions", 8),
    )

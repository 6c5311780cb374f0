"""Epsilon-sweep harness: solve kinetic and limiting problems side by side,
measure strong and weak convergence, audit every estimate, and extract the
effective diffusion coefficient.

The point of the extraction is to distinguish two candidate homogenized
coefficients that differ for every non-constant profile: the cell average
sigma* (which the kinetic scaling selects) and the harmonic mean (which
classical elliptic homogenization would select).  A sweep therefore reports
both reference values next to the fitted one.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .diffusion import build_limit_problem, solve_fv, solve_limit
from .estimates import (
    EstimateReport,
    UniformityReport,
    g_eps_uniformity,
    standard_checks,
)
from .grid import SlabGrid
from .scattering import (
    ScatteringField,
    ScatteringProfile,
    harmonic_mean,
    weak_star_limit,
)
from .transport import ConvergenceError, make_problem, solve_steady
from .velocity import VelocityQuadrature, build_quadrature

COMPARISON_MODES = ("weak-star", "pointwise-sigma-bar", "both")


class HarnessError(RuntimeError):
    """Sweep aborted; carries the partial report assembled so far."""

    def __init__(self, message: str, report: "ConvergenceReport"):
        super().__init__(message)
        self.report = report


class BracketError(RuntimeError):
    """Coefficient fit could not bracket a minimum; carries the scan trace."""

    def __init__(self, message: str, trace: Sequence[tuple[float, float]]):
        super().__init__(message)
        self.trace = tuple(trace)


def fit_rate(eps: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log(error) against log(eps)."""
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if eps.shape != errors.shape or eps.size < 3:
        raise ValueError("need at least three (eps, error) pairs")
    if np.any(eps <= 0.0) or np.any(errors <= 0.0) or not np.all(np.isfinite(errors)):
        raise ValueError("eps and errors must be positive and finite")
    return float(np.polyfit(np.log(eps), np.log(errors), 1)[0])


def fit_effective_coefficient(
    density: np.ndarray,
    source: np.ndarray,
    grid: SlabGrid,
    quadrature: VelocityQuadrature,
    bounds: tuple[float, float],
    xtol: float = 1e-4,
    scan_points: int = 33,
) -> float:
    """Fit the constant coefficient s whose limit solution best matches a
    kinetic density in discrete L2, by golden-section search over s.

    bounds is the search interval, normally (a/2, 2b) from the profile's
    declared bounds.  Raises BracketError with the coarse scan attached when
    the objective has no interior minimum there.  A zero density has no
    preferred coefficient and returns nan.
    """
    density = np.asarray(density, dtype=float)
    source = np.asarray(source, dtype=float)
    lo, hi = bounds
    if not 0.0 < lo < hi:
        raise ValueError("need 0 < lo < hi search bounds")
    if grid.l2(density) == 0.0:
        return math.nan
    m2 = quadrature.moment(2)

    def objective(s: float) -> float:
        kappa = np.full(grid.n_cells + 1, m2 / s)
        return grid.l2(solve_fv(grid, kappa, source) - density)

    scan = np.linspace(lo, hi, scan_points)
    values = [objective(s) for s in scan]
    best = int(np.argmin(values))
    if best == 0 or best == scan_points - 1:
        raise BracketError(
            f"objective has no interior minimum on [{lo:g}, {hi:g}]",
            trace=list(zip(scan.tolist(), values)),
        )
    result = minimize_scalar(
        objective,
        bracket=(scan[best - 1], scan[best], scan[best + 1]),
        method="golden",
        options={"xtol": xtol},
    )
    return float(result.x)


def weak_test_functions(grid: SlabGrid, count: int) -> np.ndarray:
    """Dirichlet sine modes sin(m pi (x + L) / (2 L)), m = 1..count, at centers."""
    x = grid.centers
    ell = grid.half_length
    m = np.arange(1, count + 1)[:, None]
    return np.sin(m * math.pi * (x[None, :] + ell) / (2.0 * ell))


@dataclass(frozen=True, eq=False)
class SweepConfig:
    """Everything a sweep needs; defaults reproduce the reference study.

    The grid for each eps obeys three rules: at least 16 cells per
    oscillation period eps^beta * P, cell size at most eps^2 /
    cells_per_eps_sq so the first-order upwind bias decays one order faster
    than the eps-asymptotics being measured, and never more than max_cells
    (points beyond that are skipped, not silently coarsened).
    """

    profile: ScatteringProfile
    quadrature: VelocityQuadrature
    source: Callable
    beta: float = 1.0
    half_length: float = 1.0
    eps_list: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    cells_per_period: int = 16
    cells_per_eps_sq: int = 16
    min_cells: int = 64
    max_cells: int = 2**22
    tol: float = 1e-10
    max_iter: int = 100_000
    mode: str = "weak-star"
    sigma_bar: float | None = None
    n_test_functions: int = 8

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps_list)
        object.__setattr__(self, "eps_list", eps)
        if not eps or any(not 0.0 < e <= 1.0 for e in eps):
            raise ValueError("eps values must lie in (0, 1]")
        if any(nxt >= cur for cur, nxt in zip(eps, eps[1:])):
            raise ValueError("eps values must be strictly decreasing")
        if self.mode not in COMPARISON_MODES:
            raise ValueError(f"mode must be one of {COMPARISON_MODES}")
        if self.n_test_functions < 1:
            raise ValueError("need at least one weak test function")
        if self.half_length <= 0.0:
            raise ValueError("half_length must be positive")
        if min(self.cells_per_period, self.cells_per_eps_sq) < 1:
            raise ValueError("resolution rule parameters must be positive")
        if not 16 <= self.min_cells <= self.max_cells:
            raise ValueError("need 16 <= min_cells <= max_cells")

    def required_cells(self, eps: float) -> int:
        """Cell count demanded by the resolution rules at this eps."""
        caps = [eps * eps / self.cells_per_eps_sq]
        a, b = self.profile.bounds
        if a < b:
            caps.append(eps**self.beta * self.profile.period / self.cells_per_period)
        n = math.ceil(2.0 * self.half_length / min(caps))
        return max(n, self.min_cells)


@dataclass(frozen=True, eq=False)
class SweepRow:
    eps: float
    n_cells: int
    skipped: bool
    l2_err: float
    weak_errs: tuple[float, ...]
    rate_so_far: float
    s_hat: float
    checks: tuple[EstimateReport, ...]
    g_eps_norm: float

    @property
    def checks_passed(self) -> bool:
        return all(r.passed for r in self.checks)


@dataclass(frozen=True, eq=False)
class ConvergenceReport:
    beta: float
    sigma_star: float
    sigma_harmonic: float
    rows: tuple[SweepRow, ...]
    fitted_rate: float
    uniformity: UniformityReport | None

    @property
    def solved_rows(self) -> tuple[SweepRow, ...]:
        return tuple(r for r in self.rows if not r.skipped)

    @property
    def any_skipped(self) -> bool:
        return any(r.skipped for r in self.rows)

    @property
    def all_passed(self) -> bool:
        if not self.solved_rows:
            return False
        checks = all(r.checks_passed for r in self.solved_rows)
        uniform = self.uniformity.passed if self.uniformity is not None else True
        return checks and uniform


def _skipped_row(eps: float, n_cells: int, count: int) -> SweepRow:
    return SweepRow(
        eps=eps,
        n_cells=n_cells,
        skipped=True,
        l2_err=math.nan,
        weak_errs=(math.nan,) * count,
        rate_so_far=math.nan,
        s_hat=math.nan,
        checks=(),
        g_eps_norm=math.nan,
    )


def _rate_so_far(rows: list[SweepRow]) -> float:
    solved = [(r.eps, r.l2_err) for r in rows if not r.skipped and r.l2_err > 0.0]
    if len(solved) < 3:
        return math.nan
    return fit_rate([e for e, _ in solved], [v for _, v in solved])


def run_sweep(config: SweepConfig, out_dir: str | Path | None = None) -> ConvergenceReport:
    """Run the full sweep in decreasing eps order.

    Solver failures and failed estimate checks abort with HarnessError after
    the partial report (all rows finished so far) is serialized to out_dir.
    """
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        (out_path / "solutions").mkdir(parents=True, exist_ok=True)
    sigma_star = weak_star_limit(config.profile)
    sigma_harm = harmonic_mean(config.profile)
    a, b = config.profile.bounds
    rows: list[SweepRow] = []

    def _assemble(uniformity=None) -> ConvergenceReport:
        solved = [r for r in rows if not r.skipped]
        if uniformity is None and solved:
            uniformity = g_eps_uniformity(
                [r.eps for r in solved], [r.g_eps_norm for r in solved], config.beta
            )
        return ConvergenceReport(
            beta=config.beta,
            sigma_star=sigma_star,
            sigma_harmonic=sigma_harm,
            rows=tuple(rows),
            fitted_rate=_rate_so_far(rows),
            uniformity=uniformity,
        )

    def _abort(message: str) -> HarnessError:
        report = _assemble()
        if out_path is not None:
            write_report_csv(report, config, out_path / "report.csv")
        return HarnessError(message, report)

    for eps in config.eps_list:
        n_cells = config.required_cells(eps)
        if n_cells > config.max_cells:
            rows.append(_skipped_row(eps, n_cells, config.n_test_functions))
            continue
        grid = SlabGrid(config.half_length, n_cells)
        field = ScatteringField(profile=config.profile, epsilon=eps, beta=config.beta)
        problem = make_problem(grid, config.quadrature, field, config.source)
        try:
            sol = solve_steady(problem, tol=config.tol, max_iter=config.max_iter)
        except (ConvergenceError, FloatingPointError) as exc:
            raise _abort(f"kinetic solve failed at eps = {eps:g}: {exc}") from exc
        rho_kin = sol.density()
        limit_weak = limit_pointwise = None
        if config.mode in ("weak-star", "both"):
            limit_weak = solve_limit(
                build_limit_problem(config.quadrature, config.profile, grid, problem.source)
            )
        if config.mode in ("pointwise-sigma-bar", "both"):
            bar = config.sigma_bar if config.sigma_bar is not None else sigma_star
            limit_pointwise = solve_limit(
                build_limit_problem(
                    config.quadrature, bar, grid, problem.source, mode="pointwise-sigma-bar"
                )
            )
        reference = limit_weak if limit_weak is not None else limit_pointwise
        diff = rho_kin - reference.rho
        phi = weak_test_functions(grid, config.n_test_functions)
        weak_errs = tuple(float(abs(grid.h * np.dot(row, diff))) for row in phi)
        try:
            s_hat = fit_effective_coefficient(
                rho_kin, problem.source, grid, config.quadrature, (0.5 * a, 2.0 * b)
            )
        except BracketError as exc:
            raise _abort(f"coefficient fit failed at eps = {eps:g}: {exc}") from exc
        checks = standard_checks(sol)
        row = SweepRow(
            eps=eps,
            n_cells=n_cells,
            skipped=False,
            l2_err=grid.l2(diff),
            weak_errs=weak_errs,
            rate_so_far=math.nan,
            s_hat=s_hat,
            checks=checks,
            g_eps_norm=grid.l2(sol.g_eps()),
        )
        rows.append(row)
        rows[-1] = dataclasses.replace(row, rate_so_far=_rate_so_far(rows))
        if out_path is not None:
            write_solution_csv(
                sol,
                reference.rho,
                None if limit_pointwise is None or config.mode != "both" else limit_pointwise.rho,
                out_path / "solutions" / f"eps_{eps:g}.csv",
            )
        if not rows[-1].checks_passed:
            failed = [r.name for r in checks if not r.passed]
            raise _abort(f"estimate checks failed at eps = {eps:g}: {', '.join(failed)}")

    report = _assemble()
    if out_path is not None:
        write_report_csv(report, config, out_path / "report.csv")
    if report.uniformity is not None and not report.uniformity.passed:
        raise HarnessError("g_eps uniformity proxy failed over the sweep", report)
    return report


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_solution_csv(sol, rho_limit, rho_limit_pw, path: str | Path) -> None:
    grid = sol.problem.grid
    columns = {
        "x": grid.centers,
        "density": sol.density(),
        "flux": sol.flux(),
        "second_moment": sol.second_moment(),
        "zeta": sol.zeta(),
        "g_eps": sol.g_eps(),
        "rho_limit": rho_limit,
    }
    if rho_limit_pw is not None:
        columns["rho_limit_pw"] = rho_limit_pw
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns.keys())
        for row in zip(*columns.values(), strict=True):
            writer.writerow(_fmt(v) for v in row)


def write_report_csv(report: ConvergenceReport, config: SweepConfig, path: str | Path) -> None:
    m = config.n_test_functions
    header = (
        ["eps", "beta", "nx", "l2_err"]
        + [f"weak_err_{i}" for i in range(1, m + 1)]
        + ["rate_so_far", "s_hat", "sigma_star", "sigma_harm", "checks_passed"]
    )
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in report.rows:
            if row.skipped:
                record = (
                    [_fmt(row.eps), _fmt(report.beta), str(row.n_cells), ""]
                    + [""] * m
                    + ["", "", _fmt(report.sigma_star), _fmt(report.sigma_harmonic), "skipped"]
                )
            else:
                record = (
                    [_fmt(row.eps), _fmt(report.beta), str(row.n_cells), _fmt(row.l2_err)]
                    + [_fmt(v) for v in row.weak_errs]
                    + [
                        "" if math.isnan(row.rate_so_far) else _fmt(row.rate_so_far),
                        _fmt(row.s_hat),
                        _fmt(report.sigma_star),
                        _fmt(report.sigma_harmonic),
                        "true" if row.checks_passed else "false",
                    ]
                )
            writer.writerow(record)


def default_quadrature() -> VelocityQuadrature:
    return build_quadrature("gauss-legendre-uniform", 16)

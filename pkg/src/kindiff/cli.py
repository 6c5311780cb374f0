"""Command-line interface.

Subcommands:

    solve-kinetic    one transport solve, moments written as CSV
    solve-diffusion  one limiting diffusion solve, density written as CSV
    check-estimates  one transport solve, estimate suite written as CSV
    norms            H^s norms of the relative coefficient defect over eps
    sweep            full eps sweep with report and per-point solutions

Exit codes for `sweep`: 0 when every check passed and nothing was skipped,
2 when points were skipped by the cell-count guard, 1 on solver or check
failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from .config import Config, profile_from, quadrature_from, source_from, sweep_config_from
from .diffusion import build_limit_problem, solve_limit
from .estimates import check_h_half_condition, sobolev_norm, standard_checks
from .grid import SlabGrid
from .harness import HarnessError, fit_rate, run_sweep, write_solution_csv
from .scattering import ScatteringField, weak_star_limit
from .transport import ConvergenceError, make_problem, solve_steady


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _single_solve(cfg: Config):
    sweep_cfg = sweep_config_from(cfg)
    eps = cfg.get_float("epsilon", 0.05)
    n_cells = cfg.get_int("grid.cells") or sweep_cfg.required_cells(eps)
    if n_cells > sweep_cfg.max_cells:
        raise ValueError(f"resolution rule needs {n_cells} cells, above the guard")
    grid = SlabGrid(sweep_cfg.half_length, n_cells)
    field = ScatteringField(profile=sweep_cfg.profile, epsilon=eps, beta=sweep_cfg.beta)
    problem = make_problem(grid, sweep_cfg.quadrature, field, sweep_cfg.source)
    return sweep_cfg, solve_steady(problem, tol=sweep_cfg.tol, max_iter=sweep_cfg.max_iter)


def _cmd_solve_kinetic(args) -> int:
    cfg = Config.load(args.config)
    _, sol = _single_solve(cfg)
    grid = sol.problem.grid
    columns = [
        ("x", grid.centers),
        ("density", sol.density()),
        ("flux", sol.flux()),
        ("second_moment", sol.second_moment()),
        ("zeta", sol.zeta()),
        ("g_eps", sol.g_eps()),
    ]
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(name for name, _ in columns)
        for row in zip(*(values for _, values in columns), strict=True):
            writer.writerow(_fmt(v) for v in row)
    print(f"wrote {args.out} ({sol.stats.iterations} iterations, "
          f"residual {sol.stats.residual:.3e})")
    return 0


def _cmd_solve_diffusion(args) -> int:
    cfg = Config.load(args.config)
    quadrature = quadrature_from(cfg)
    profile = profile_from(cfg)
    source = source_from(cfg)
    grid = SlabGrid(cfg.get_float("slab.half_length", 1.0), cfg.get_int("grid.cells", 4096))
    mode = cfg.get("sweep.mode", "weak-star")
    if mode == "pointwise-sigma-bar":
        bar = cfg.get_float("sigma.bar") or weak_star_limit(profile)
        problem = build_limit_problem(quadrature, bar, grid, source, mode=mode)
    else:
        problem = build_limit_problem(quadrature, profile, grid, source)
    sol = solve_limit(problem)
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "rho"])
        for x, r in zip(grid.centers, sol.rho, strict=True):
            writer.writerow([_fmt(x), _fmt(r)])
    print(f"wrote {args.out}")
    return 0


def _cmd_check_estimates(args) -> int:
    cfg = Config.load(args.config)
    _, sol = _single_solve(cfg)
    reports = standard_checks(sol)
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["estimate", "lhs", "rhs", "slack", "pass"])
        for r in reports:
            writer.writerow(
                [r.name, _fmt(r.lhs), _fmt(r.rhs), _fmt(r.slack), "true" if r.passed else "false"]
            )
    failed = [r.name for r in reports if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}; all {len(reports)} checks passed")
    return 0


def _cmd_norms(args) -> int:
    cfg = Config.load(args.profile)
    profile = profile_from(cfg)
    eps_list = [float(part) for part in args.eps.split(",")]
    sigma_bar = args.sigma_bar if args.sigma_bar is not None else weak_star_limit(profile)
    if args.order == -0.5:
        report = check_h_half_condition(profile, sigma_bar, args.beta, eps_list)
        norms = report.norms
        slope = report.fitted_p
        verdict = "satisfied" if report.satisfied else "not satisfied"
    else:
        norms = []
        for eps in eps_list:
            field = ScatteringField(profile=profile, epsilon=eps, beta=args.beta)
            length = 2.0 * math.pi
            cycles = length / (field.eta * profile.period)
            n = 1 << max(8, math.ceil(math.log2(8 * max(cycles, 1.0))))
            x = np.arange(n) * (length / n)
            q = (sigma_bar - np.asarray(field(x))) / sigma_bar
            norms.append(sobolev_norm(q, length, args.order).value)
        slope = fit_rate(eps_list, norms) if len(eps_list) >= 3 and min(norms) > 0 else math.nan
        verdict = None
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["eps", "norm"])
        for eps, value in zip(eps_list, norms, strict=True):
            writer.writerow([_fmt(eps), _fmt(value)])
    line = f"order {args.order:g}: fitted exponent {slope:.4f}"
    if verdict is not None:
        line += f", smallness condition {verdict}"
    print(line)
    return 0


def _cmd_sweep(args) -> int:
    cfg = Config.load(args.config)
    sweep_cfg = sweep_config_from(cfg)
    try:
        report = run_sweep(sweep_cfg, out_dir=args.out_dir)
    except HarnessError as exc:
        print(f"sweep aborted: {exc}", file=sys.stderr)
        return 1
    solved = report.solved_rows
    print(
        f"sweep finished: {len(solved)} solved, "
        f"{len(report.rows) - len(solved)} skipped, "
        f"rate {report.fitted_rate if not math.isnan(report.fitted_rate) else float('nan'):.3f}, "
        f"sigma* {report.sigma_star:.6g}, harmonic {report.sigma_harmonic:.6g}"
    )
    if not report.all_passed:
        return 1
    return 2 if report.any_skipped else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kindiff",
        description="slab transport with oscillating scattering and its diffusion limit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-kinetic", help="solve one transport problem")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_solve_kinetic)

    p = sub.add_parser("solve-diffusion", help="solve one limiting diffusion problem")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_solve_diffusion)

    p = sub.add_parser("check-estimates", help="run the estimate suite on one solve")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_check_estimates)

    p = sub.add_parser("norms", help="H^s norms of the coefficient defect over eps")
    p.add_argument("--profile", required=True, help="config file with sigma.* keys")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--eps", required=True, help="comma-separated eps list")
    p.add_argument("--order", type=float, default=-0.5, choices=[-1.0, -0.5, 0.5])
    p.add_argument("--sigma-bar", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_norms)

    p = sub.add_parser("sweep", help="full eps sweep with convergence report")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConvergenceError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

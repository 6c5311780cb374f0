"""Discrete-ordinates solver for the scaled stationary transport equation

    f + (v/eps) f_x + (sigma^eps(x)/eps^2) (f - <f>) = g(x)

on the slab (-L, L) with zero inflow: f(-L, v) = 0 for v > 0 and
f(L, v) = 0 for v < 0.  Velocities are quadrature ordinates, space is a
uniform cell-centered grid, and the advection term is first-order upwind, so
each ordinate equation is a bidiagonal system swept in the flow direction
(left to right for v > 0, right to left for v < 0).  Ghost inflow values are
exactly zero by construction.

The scattering coupling is resolved by source iteration: sweep all ordinates
against the previous density <f>, then correct the density with a
diffusion-synthetic-acceleration (DSA) step.  The DSA operator is the
discretized limit operator with the oscillating coefficient itself,

    delta - D_h( (<v^2>/sigma^eps) D_h delta ) = (sigma^eps/eps^2) (<f>_new - <f>_old),

reusing the finite-volume kernel of the diffusion module.  Without it the
iteration contracts only like sigma/(sigma + eps^2) and stalls for small eps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .diffusion import harmonic_face_average, solve_fv
from .grid import SlabGrid
from .scattering import ScatteringField
from .velocity import VelocityQuadrature

_CELLS_PER_OSCILLATION = 16
_MIN_DAMPING = 1.0 / 32.0


class ConvergenceError(RuntimeError):
    """Source iteration failed; carries the last residual norm."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True, eq=False)
class KineticProblem:
    grid: SlabGrid
    quadrature: VelocityQuadrature
    field: ScatteringField
    source: np.ndarray
    sigma_centers: np.ndarray

    @property
    def epsilon(self) -> float:
        return self.field.epsilon


def make_problem(
    grid: SlabGrid,
    quadrature: VelocityQuadrature,
    field: ScatteringField,
    source,
) -> KineticProblem:
    """Validate and assemble a transport problem.

    The source may be a callable of x or an array of cell-center values.  For
    oscillating coefficients the grid must resolve the oscillation with at
    least 16 cells per period eps^beta * P; constant profiles carry no
    oscillation, so the rule is vacuous for them.
    """
    if callable(source):
        source = source(grid.centers)
    source = np.asarray(source, dtype=float)
    if source.shape != (grid.n_cells,):
        raise ValueError(f"source must hold {grid.n_cells} cell values")
    if not np.all(np.isfinite(source)):
        raise ValueError("source must be finite")
    a, b = field.profile.bounds
    if a < b:
        max_h = field.x_period / _CELLS_PER_OSCILLATION
        if grid.h > max_h * (1.0 + 1e-9):
            need = int(np.ceil(2.0 * grid.half_length / max_h))
            raise ValueError(
                f"grid does not resolve the oscillation: h = {grid.h:g} exceeds "
                f"period/{_CELLS_PER_OSCILLATION} = {max_h:g}; need >= {need} cells"
            )
    sigma_centers = np.asarray(field(grid.centers), dtype=float)
    return KineticProblem(
        grid=grid,
        quadrature=quadrature,
        field=field,
        source=source,
        sigma_centers=sigma_centers,
    )


@dataclass(frozen=True)
class IterationStats:
    iterations: int
    residual: float
    accelerated: bool


@dataclass(frozen=True, eq=False)
class KineticSolution:
    """Converged ordinate field f[i, j] at cell i, ordinate j, plus moments.

    Moment derivatives use centered differences in the interior and one-sided
    second-order stencils at the boundary cells (np.gradient with
    edge_order=2).
    """

    problem: KineticProblem
    f: np.ndarray
    stats: IterationStats

    def _w(self) -> np.ndarray:
        return self.problem.quadrature.weights

    def density(self) -> np.ndarray:
        """<f> at cell centers."""
        return self.f @ self._w()

    def flux(self) -> np.ndarray:
        """<v f> at cell centers."""
        q = self.problem.quadrature
        return self.f @ (q.weights * q.nodes)

    def second_moment(self) -> np.ndarray:
        """<v^2 f> at cell centers."""
        q = self.problem.quadrature
        return self.f @ (q.weights * q.nodes**2)

    def continuity_residual(self) -> np.ndarray:
        """<f> + (1/eps) D_h <v f> - g, the zeroth moment identity."""
        h = self.problem.grid.h
        eps = self.problem.epsilon
        dflux = np.gradient(self.flux(), h, edge_order=2)
        return self.density() + dflux / eps - self.problem.source

    def g_eps(self) -> np.ndarray:
        """Effective source of the current-scaled moment system,

        g - <f> + (eps/sigma^eps) D_h <v f> - eps (D_h sigma^eps / (sigma^eps)^2) <v f>.

        Uniformly bounded in eps when the oscillation exponent beta <= 2.
        """
        p = self.problem
        h = p.grid.h
        eps = p.epsilon
        flux = self.flux()
        dflux = np.gradient(flux, h, edge_order=2)
        dsigma = np.gradient(p.sigma_centers, h, edge_order=2)
        return (
            p.source
            - self.density()
            + eps * dflux / p.sigma_centers
            - eps * dsigma / p.sigma_centers**2 * flux
        )

    def zeta(self) -> np.ndarray:
        """(1/sigma^eps) D_h <v^2 f>, the flux of the limiting problem.

        Satisfies -D_h zeta ~ g_eps and stays bounded in H1 uniformly in eps.
        """
        h = self.problem.grid.h
        dm2 = np.gradient(self.second_moment(), h, edge_order=2)
        return dm2 / self.problem.sigma_centers


def _ordinate_systems(problem: KineticProblem):
    """Banded (1, 0) matrices for every ordinate sweep.

    Positive ordinates sweep left to right; negative ordinates are solved on
    the reversed grid so the same lower-bidiagonal layout applies.
    """
    grid = problem.grid
    eps = problem.epsilon
    s2r = problem.sigma_centers / eps**2
    base = 1.0 + s2r
    base_rev = base[::-1]
    n = grid.n_cells
    nodes = problem.quadrature.nodes
    half = nodes.size // 2
    systems = []
    for k in range(half):
        v = nodes[half + k]
        c = v / (eps * grid.h)
        for column, diag in ((half + k, base), (half - 1 - k, base_rev)):
            ab = np.zeros((2, n))
            ab[0] = diag + c
            ab[1, :-1] = -c
            systems.append((column, column < half, ab))
    return systems, s2r


def solve_steady(
    problem: KineticProblem,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    accelerate: bool = True,
) -> KineticSolution:
    """Run source iteration with DSA until the discrete residual of the
    coupled upwind system drops below tol * ||g||.

    Deterministic: fixed sweep order and fixed reduction order, so identical
    inputs give bitwise identical ordinate fields.  Raises ConvergenceError
    after max_iter iterations and FloatingPointError on the first non-finite
    cell value.
    """
    if not 0.0 < tol <= 1e-4:
        raise ValueError("tol must lie in (0, 1e-4]")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    grid = problem.grid
    n = grid.n_cells
    w = problem.quadrature.weights
    systems, s2r = _ordinate_systems(problem)
    m2 = problem.quadrature.moment(2)
    kappa_faces = harmonic_face_average(m2 / problem.sigma_centers)
    g = problem.source
    g_norm = grid.l2(g)
    f = np.zeros((n, problem.quadrature.n))
    rho = np.zeros(n)
    damping = 1.0
    used_dsa = False
    prev_residual = np.inf
    residual = np.inf
    bad_streak = 0
    for iteration in range(1, max_iter + 1):
        q = g + s2r * rho
        for column, reverse, ab in systems:
            rhs = q[::-1] if reverse else q
            sol = solve_banded((1, 0), ab, rhs, check_finite=False)
            f[:, column] = sol[::-1] if reverse else sol
        if not np.all(np.isfinite(f)):
            i, j = np.argwhere(~np.isfinite(f))[0]
            raise FloatingPointError(
                f"non-finite ordinate value at cell {i} (x = {grid.centers[i]:g}), "
                f"ordinate {j} (v = {problem.quadrature.nodes[j]:g}) "
                f"in iteration {iteration}"
            )
        rho_new = f @ w
        residual = grid.l2(s2r * (rho_new - rho))
        if residual <= tol * g_norm:
            stats = IterationStats(iterations=iteration, residual=residual, accelerated=used_dsa)
            return KineticSolution(problem=problem, f=f, stats=stats)
        if accelerate and damping > 0.0:
            if residual > prev_residual:
                # diverging correction: damp, eventually fall back to plain iteration
                damping = damping / 2.0 if damping >= _MIN_DAMPING else 0.0
            delta = solve_fv(grid, kappa_faces, s2r * (rho_new - rho))
            rho = rho_new + damping * delta
            used_dsa = True
        else:
            rho = rho_new
        prev_residual = residual
    raise ConvergenceError(
        f"source iteration did not reach tol*||g|| = {tol * g_norm:g} "
        f"within {max_iter} iterations (last residual {residual:g})",
        residual=residual,
    )

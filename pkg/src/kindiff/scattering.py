"""Oscillating scattering coefficients sigma^eps(x) = sigma(x / eps^beta).

A profile is a periodic cell function sigma(y) with declared bounds
0 < a <= sigma <= b and a declared Lipschitz constant c.  Rescaling by
eta = eps^beta produces the coefficient seen by the transport equation; its
gradient grows like c / eta, which is exactly the blow-up rate the a priori
theory tolerates for beta <= 2.

Two cell averages of a profile matter and must not be confused:

    weak-* limit   sigma* = (1/P) int_0^P sigma(y) dy
    harmonic mean  P / int_0^P dy / sigma(y)

The harmonic mean is the classical elliptic homogenization coefficient; the
kinetic limit instead selects the plain average sigma*.  By Jensen's
inequality harmonic <= weak-*, with equality only for constant profiles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import simpson

KINDS = ("constant", "sinusoidal", "two-phase", "user-table")

_MEAN_PANELS = 2**14  # composite-quadrature panels for the cell averages
_PERIODICITY_TOL = 1e-12
_SLOPE_SLACK = 1e-6
_BOUND_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ScatteringProfile:
    """Periodic cell profile sigma(y) with declared bounds and slope.

    The declared bounds and Lipschitz constant are trusted metadata: they are
    what the estimate checks use for a and b, and `verify_hypotheses` audits
    the actual samples against them rather than silently re-deriving them.
    """

    kind: str
    period: float
    bounds: tuple[float, float]
    lipschitz: float
    fn: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not self.period > 0.0:
            raise ValueError("period must be positive")
        a, b = self.bounds
        if not (0.0 < a <= b):
            raise ValueError("declared bounds must satisfy 0 < a <= b")
        if self.lipschitz < 0.0:
            raise ValueError("Lipschitz constant must be nonnegative")
        gap = abs(self.value(0.0) - self.value(self.period))
        if gap > _PERIODICITY_TOL:
            raise ValueError(f"profile is not periodic: |sigma(0) - sigma(P)| = {gap:g}")

    def value(self, y) -> np.ndarray | float:
        """sigma(y), wrapped periodically onto [0, period)."""
        y = np.asarray(y, dtype=float)
        out = self.fn(np.mod(y, self.period))
        return float(out) if out.ndim == 0 else out


def constant_profile(value: float, period: float = 1.0) -> ScatteringProfile:
    if not value > 0.0:
        raise ValueError("constant profile value must be positive")
    return ScatteringProfile(
        kind="constant",
        period=period,
        bounds=(value, value),
        lipschitz=0.0,
        fn=lambda y: np.full_like(y, value, dtype=float),
    )


def sinusoidal_profile(
    mean: float = 2.0,
    amplitude: float = 1.0,
    period: float = 2.0 * math.pi,
    bounds: tuple[float, float] | None = None,
) -> ScatteringProfile:
    """sigma(y) = mean + amplitude * sin(2 pi y / period).

    With the defaults this is the reference profile 2 + sin(y).  `bounds`
    overrides the derived (mean - |amplitude|, mean + |amplitude|) pair, for
    auditing deliberately wrong declarations.
    """
    amp = abs(float(amplitude))
    if not mean - amp > 0.0:
        raise ValueError("profile must stay positive: need mean > |amplitude|")
    omega = 2.0 * math.pi / period
    derived = (mean - amp, mean + amp)
    return ScatteringProfile(
        kind="sinusoidal",
        period=period,
        bounds=derived if bounds is None else bounds,
        lipschitz=amp * omega,
        fn=lambda y: mean + amplitude * np.sin(omega * y),
    )


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def two_phase_profile(
    values: tuple[float, float] = (1.0, 3.0),
    fractions: tuple[float, float] = (0.5, 0.5),
    period: float = 1.0,
    transition: float = 0.01,
) -> ScatteringProfile:
    """Mollified two-phase layout: values[0] on the first volume fraction,
    values[1] on the rest, joined by cubic smoothsteps of width
    `transition` * period so the profile keeps a finite Lipschitz constant.

    The smoothstep is symmetric about its midpoint, so the mollification
    preserves the volume-fraction mean exactly; the harmonic mean shifts by
    O(transition).
    """
    s1, s2 = (float(v) for v in values)
    if min(s1, s2) <= 0.0:
        raise ValueError("two-phase values must be positive")
    th1, th2 = (float(f) for f in fractions)
    if th1 <= 0.0 or th2 <= 0.0 or abs(th1 + th2 - 1.0) > 1e-12:
        raise ValueError("fractions must be positive and sum to one")
    if not 0.0 < transition < min(th1, th2):
        raise ValueError("transition width must be positive and fit inside both plateaus")
    delta = transition * period
    edge = th1 * period  # center of the interior transition

    def fn(y: np.ndarray) -> np.ndarray:
        y = np.mod(np.asarray(y, dtype=float), period)
        out = np.empty_like(y)
        half = 0.5 * delta
        lo1, hi1 = edge - half, edge + half
        # plateau 1, transition up, plateau 2, transition down (wrapping 0/P)
        plateau1 = (y >= half) & (y <= lo1)
        plateau2 = (y >= hi1) & (y <= period - half)
        trans_up = (y > lo1) & (y < hi1)
        out[plateau1] = s1
        out[plateau2] = s2
        out[trans_up] = s1 + (s2 - s1) * _smoothstep((y[trans_up] - lo1) / delta)
        trans_dn = ~(plateau1 | plateau2 | trans_up)
        # map wrap neighborhood [P - half, P) u [0, half) onto t in [0, 1)
        t = np.where(y[trans_dn] >= period - half, y[trans_dn] - (period - half), y[trans_dn] + half) / delta
        out[trans_dn] = s2 + (s1 - s2) * _smoothstep(t)
        return out

    lo, hi = min(s1, s2), max(s1, s2)
    return ScatteringProfile(
        kind="two-phase",
        period=period,
        bounds=(lo, hi),
        lipschitz=1.5 * (hi - lo) / delta,
        fn=fn,
    )


def table_profile(
    y: np.ndarray,
    sigma: np.ndarray,
    period: float | None = None,
) -> ScatteringProfile:
    """Piecewise-linear periodic profile through sample points (y, sigma)."""
    y = np.asarray(y, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if y.ndim != 1 or y.shape != sigma.shape or y.size < 2:
        raise ValueError("table needs matching 1-d y and sigma columns with >= 2 rows")
    if np.any(np.diff(y) <= 0.0):
        raise ValueError("table y values must be strictly increasing")
    if y[0] < 0.0:
        raise ValueError("table y values must start at or above 0")
    if period is None:
        period = float(y[-1])
        if abs(sigma[0] - sigma[-1]) > _PERIODICITY_TOL:
            raise ValueError("table endpoints must match to wrap periodically")
        yy, ss = y[:-1], sigma[:-1]
    else:
        if y[-1] >= period:
            raise ValueError("table y values must lie inside [0, period)")
        yy, ss = y, sigma
    if np.any(ss <= 0.0):
        raise ValueError("table sigma values must be positive")
    xp = np.concatenate([yy, [yy[0] + period]])
    fp = np.concatenate([ss, [ss[0]]])
    if yy[0] > 0.0:
        xp = np.concatenate([[yy[-1] - period], xp])
        fp = np.concatenate([[ss[-1]], fp])
    slopes = np.abs(np.diff(fp) / np.diff(xp))
    return ScatteringProfile(
        kind="user-table",
        period=float(period),
        bounds=(float(ss.min()), float(ss.max())),
        lipschitz=float(slopes.max()),
        fn=lambda q: np.interp(np.mod(q - yy[0], period) + yy[0], xp, fp),
    )


def profile_from_csv(path, period: float | None = None) -> ScatteringProfile:
    """Load a user table: two-column CSV `y,sigma` with one header row."""
    rows = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise ValueError(f"{path}: expected a header row with two columns")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed table row {row!r}") from exc
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two data rows")
    data = np.asarray(rows, dtype=float)
    return table_profile(data[:, 0], data[:, 1], period=period)


def weak_star_limit(profile: ScatteringProfile) -> float:
    """Cell average (1/P) int_0^P sigma(y) dy by composite Simpson quadrature."""
    y = np.linspace(0.0, profile.period, 2 * _MEAN_PANELS + 1)
    return float(simpson(profile.fn(np.minimum(y, profile.period)), x=y) / profile.period)


def harmonic_mean(profile: ScatteringProfile) -> float:
    """P / int_0^P dy / sigma(y), the classical elliptic homogenized value."""
    y = np.linspace(0.0, profile.period, 2 * _MEAN_PANELS + 1)
    vals = profile.fn(np.minimum(y, profile.period))
    return float(profile.period / simpson(1.0 / vals, x=y))


@dataclass(frozen=True)
class ScatteringField:
    """Rescaled coefficient sigma^eps(x) = profile(x / eps^beta)."""

    profile: ScatteringProfile
    epsilon: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.beta < 0.0:
            raise ValueError("beta must be nonnegative")

    @property
    def eta(self) -> float:
        """Oscillation scale eps^beta."""
        return self.epsilon**self.beta

    @property
    def x_period(self) -> float:
        return self.eta * self.profile.period

    def __call__(self, x) -> np.ndarray | float:
        return self.profile.value(np.asarray(x, dtype=float) / self.eta)


@dataclass(frozen=True)
class HypothesisReport:
    """Audit of a field against its declared bounds and scaled slope."""

    sigma_min: float
    sigma_max: float
    max_slope: float
    slope_bound: float
    bounds_ok: bool
    slope_ok: bool
    violations: tuple[float, ...]

    @property
    def passed(self) -> bool:
        return self.bounds_ok and self.slope_ok


def verify_hypotheses(field: ScatteringField, audit_points: int = 512) -> HypothesisReport:
    """Sample one oscillation period of the field and audit the hypotheses.

    Checks a <= sigma^eps <= b at `audit_points` positions plus midpoints,
    and the finite-difference slope against (c / eta) with 1e-6 relative
    slack.  A failed audit is reported, not raised: the report lists up to 32
    violating sample positions.
    """
    if audit_points < 2:
        raise ValueError("audit_points must be at least 2")
    a, b = field.profile.bounds
    xs = np.linspace(0.0, field.x_period, 2 * audit_points + 1)
    vals = np.asarray(field(xs), dtype=float)
    slopes = np.abs(np.diff(vals) / np.diff(xs))
    slope_bound = field.profile.lipschitz / field.eta
    pad = _BOUND_SLACK * max(1.0, abs(a), abs(b))
    below = vals < a - pad
    above = vals > b + pad
    steep = slopes > slope_bound * (1.0 + _SLOPE_SLACK)
    bad = np.flatnonzero(below | above)
    bad_slope = np.flatnonzero(steep)
    violations = list(xs[bad][:32])
    for idx in bad_slope[:32]:
        violations.append(0.5 * (xs[idx] + xs[idx + 1]))
    return HypothesisReport(
        sigma_min=float(vals.min()),
        sigma_max=float(vals.max()),
        max_slope=float(slopes.max()),
        slope_bound=float(slope_bound),
        bounds_ok=not bad.size,
        slope_ok=not bad_slope.size,
        violations=tuple(violations[:32]),
    )

"""Discrete velocity space on (-1, 1) under the normalized uniform measure.

The continuous velocity average is <phi> = (1/2) integral_{-1}^{1} phi(v) dv.
A quadrature replaces it by a finite sum <phi> ~ sum_j w_j phi(v_j) with
positive weights summing to one, symmetric nodes v_j in (-1, 1), and no node
at v = 0.  Symmetry makes every odd moment vanish exactly, in particular
<v> = 0, which the transport solver relies on.

The collision operator is projection onto fluctuations,

    (L phi)_j = phi_j - sum_m w_m phi_m,

with the algebraic identities

    sum_j w_j phi_j (L phi)_j = (1/2) sum_{j,m} w_j w_m (phi_j - phi_m)^2 >= 0,
    <psi, L phi> = <phi, L psi>,     L(L phi) = L phi,     L v = v.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FAMILIES = ("gauss-legendre-uniform", "uniform-midpoint")

_WEIGHT_SUM_TOL = 1e-14
_IDENTITY_RTOL = 1e-12


def _as_samples(phi, n: int) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (n,):
        raise ValueError(f"expected {n} velocity samples, got shape {phi.shape}")
    return phi


@dataclass(frozen=True, eq=False)
class VelocityQuadrature:
    """Symmetric quadrature for the normalized uniform measure on (-1, 1).

    Nodes are sorted ascending and come in exact +/- pairs: nodes[j] is the
    floating-point negation of nodes[n-1-j], and the paired weights are
    bitwise equal.  Even moments are cached on first use; odd moments are
    summed pair by pair so they are exactly zero.
    """

    nodes: np.ndarray
    weights: np.ndarray
    _moments: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        n = nodes.size
        if n < 2 or n % 2 != 0:
            raise ValueError("node count must be even and at least 2")
        if weights.shape != nodes.shape:
            raise ValueError("nodes and weights must have matching shapes")
        if np.any(weights <= 0.0):
            raise ValueError("weights must be positive")
        if abs(float(weights.sum()) - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError("weights must sum to one")
        if np.any(np.abs(nodes) >= 1.0) or np.any(nodes == 0.0):
            raise ValueError("nodes must lie in (-1, 1) away from v = 0")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing")
        mirrored = nodes + nodes[::-1]
        if np.any(mirrored != 0.0) or np.any(weights != weights[::-1]):
            raise ValueError("nodes and weights must form exact symmetric pairs")

    @property
    def n(self) -> int:
        return self.nodes.size

    def moment(self, k: int) -> float:
        """<v^k>, summed over symmetric node pairs (odd k gives exactly 0.0)."""
        if k < 0:
            raise ValueError("moment order must be nonnegative")
        cached = self._moments.get(k)
        if cached is not None:
            return cached
        half = self.n // 2
        v = self.nodes[half:]
        w = self.weights[half:]
        # (-v)^k is the exact negation of v^k for odd k, so each pair cancels.
        value = float(np.sum(w * (v**k + (-v) ** k)))
        self._moments[k] = value
        return value

    def average(self, phi) -> float:
        """<phi> = sum_j w_j phi_j."""
        phi = _as_samples(phi, self.n)
        return float(np.dot(self.weights, phi))

    def apply_collision(self, phi) -> np.ndarray:
        """(L phi)_j = phi_j - <phi>."""
        phi = _as_samples(phi, self.n)
        return phi - np.dot(self.weights, phi)

    def dirichlet_form(self, phi) -> float:
        """Quadratic form <phi, L phi>.

        Evaluated both as the inner product sum_j w_j phi_j (L phi)_j and as
        the manifestly nonnegative double sum
        (1/2) sum_{j,m} w_j w_m (phi_j - phi_m)^2.  The two evaluations are
        required to agree to 1e-12 relative to the size of phi, and the
        double-sum value is returned so the result can never dip below zero
        by cancellation.
        """
        phi = _as_samples(phi, self.n)
        inner = float(np.sum(self.weights * phi * self.apply_collision(phi)))
        diff = phi[:, None] - phi[None, :]
        double = 0.5 * float(
            np.sum(self.weights[:, None] * self.weights[None, :] * diff**2)
        )
        scale = max(1.0, float(np.dot(self.weights, phi * phi)))
        if abs(inner - double) > _IDENTITY_RTOL * scale:
            raise FloatingPointError(
                "Dirichlet form evaluations disagree: "
                f"inner={inner!r} double-sum={double!r}"
            )
        return double

    def self_adjointness_defect(self, phi, psi) -> float:
        """|<psi, L phi> - <phi, L psi>| (should be at roundoff level)."""
        phi = _as_samples(phi, self.n)
        psi = _as_samples(psi, self.n)
        left = float(np.sum(self.weights * psi * self.apply_collision(phi)))
        right = float(np.sum(self.weights * phi * self.apply_collision(psi)))
        return abs(left - right)


def _mirror(positive_nodes: np.ndarray, positive_weights: np.ndarray) -> VelocityQuadrature:
    """Assemble a quadrature from its positive half, normalizing the weights."""
    v = np.sort(np.asarray(positive_nodes, dtype=float))
    w = np.asarray(positive_weights, dtype=float)[np.argsort(positive_nodes)]
    nodes = np.concatenate([-v[::-1], v])
    weights = np.concatenate([w[::-1], w])
    weights = weights / weights.sum()
    return VelocityQuadrature(nodes=nodes, weights=weights)


def build_quadrature(family: str = "gauss-legendre-uniform", n: int = 16) -> VelocityQuadrature:
    """Build an n-point quadrature of the given family.

    gauss-legendre-uniform: Gauss-Legendre nodes on (-1, 1) with weights
    halved so they sum to one; exact for polynomial integrands of degree
    <= 2n - 1 against the uniform measure.

    uniform-midpoint: midpoints of n equal cells with equal weights 1/n.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown quadrature family {family!r}; choose from {FAMILIES}")
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be even and at least 2")
    if family == "gauss-legendre-uniform":
        x, w = np.polynomial.legendre.leggauss(n)
        pos = x > 0.0
        return _mirror(x[pos], w[pos])
    half = n // 2
    # midpoints of the positive half-interval (0, 1)
    v = (np.arange(half) + 0.5) / half
    w = np.full(half, 1.0 / n)
    return _mirror(v, w)

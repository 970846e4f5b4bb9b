"""Numerical integration: Euler beta function, Gauss rules on [0,1] (plain
and with the symmetric weight t^g (1-t)^g), and symmetric triangle rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, UnsupportedDegree


def beta(z1: float, z2: float) -> float:
    """Euler beta function B(z1, z2) for positive arguments, via log-gamma."""
    if not (z1 > 0.0 and z2 > 0.0) or not (math.isfinite(z1) and math.isfinite(z2)):
        raise DomainError(f"beta requires positive arguments, got ({z1}, {z2})")
    return math.exp(math.lgamma(z1) + math.lgamma(z2) - math.lgamma(z1 + z2))


def sigma(gamma: float) -> float:
    """Total mass of the weight t^gamma (1-t)^gamma on [0,1]: B(g+1, g+1)."""
    if not gamma > -1.0:
        raise DomainError(f"weight exponent must be > -1, got {gamma}")
    return beta(gamma + 1.0, gamma + 1.0)


@dataclass(frozen=True)
class SegmentRule:
    """Quadrature rule on [0,1]; weight_exponent is the absorbed exponent
    of t^g (1-t)^g, or None for a plain (unweighted) rule."""

    nodes: np.ndarray
    weights: np.ndarray
    weight_exponent: float | None = None

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(values, self.weights))


@lru_cache(maxsize=None)
def gauss_legendre_01(n: int) -> SegmentRule:
    """n-point Gauss-Legendre rule on [0,1], exact up to degree 2n-1."""
    if not 1 <= n <= 64:
        raise ValueError(f"point count must be in 1..64, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    return SegmentRule(0.5 * (x + 1.0), 0.5 * w, None)


@lru_cache(maxsize=None)
def gauss_jacobi_01(gamma: float, n: int) -> SegmentRule:
    """n-point Gauss rule for the weight t^gamma (1-t)^gamma on [0,1].

    Built from the symmetric-Jacobi three-term recurrence via the
    tridiagonal eigenvalue (Golub-Welsch) construction on [-1,1], then
    mapped to [0,1]. Exact for weighted polynomials up to degree 2n-1.
    """
    gamma = float(gamma)
    if not gamma > -1.0:
        raise DomainError(f"weight exponent must be > -1, got {gamma}")
    if not 1 <= n <= 64:
        raise ValueError(f"point count must be in 1..64, got {n}")
    # monic recurrence for the weight (1-x^2)^gamma: diagonal terms vanish
    b = np.zeros(n)
    b[0] = 2.0 ** (2.0 * gamma + 1.0) * sigma(gamma)
    if n > 1:
        b[1] = 1.0 / (2.0 * gamma + 3.0)
    for k in range(2, n):
        b[k] = k * (k + 2.0 * gamma) / ((2.0 * k + 2.0 * gamma + 1.0) * (2.0 * k + 2.0 * gamma - 1.0))
    jac = np.diag(np.sqrt(b[1:]), -1)
    x, vecs = np.linalg.eigh(jac + jac.T)
    w = b[0] * vecs[0, :] ** 2
    return SegmentRule(0.5 * (x + 1.0), w / 2.0 ** (2.0 * gamma + 1.0), gamma)


@dataclass(frozen=True)
class TriangleRule:
    """Symmetric rule in barycentric coordinates; weights sum to 1, so the
    caller multiplies by the physical triangle area."""

    bary_nodes: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self):
        self.bary_nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_points(self) -> int:
        return self.weights.shape[0]


# Symmetric rules from Dunavant, "High degree efficient symmetrical Gaussian
# quadrature rules for the triangle" (1985). Each entry is one orbit: a
# barycentric triple plus its weight; orbits expand to 1, 3 or 6 points.
# Only rules with positive weights and strictly interior points are kept.
_DUNAVANT = {
    2: [((2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0), 1.0 / 3.0)],
    5: [
        ((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), 0.225),
        ((0.059715871789770, 0.470142064105115, 0.470142064105115), 0.132394152788506),
        ((0.797426985353087, 0.101286507323456, 0.101286507323456), 0.125939180544827),
    ],
    8: [
        ((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), 0.144315607677787),
        ((0.081414823414554, 0.459292588292723, 0.459292588292723), 0.095091634267285),
        ((0.658861384496480, 0.170569307751760, 0.170569307751760), 0.103217370534718),
        ((0.898905543365938, 0.050547228317031, 0.050547228317031), 0.032458497623198),
        ((0.008394777409958, 0.263112829634638, 0.728492392955404), 0.027230314174435),
    ],
    10: [
        ((1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0), 0.090817990382754),
        ((0.028844733232685, 0.485577633383657, 0.485577633383657), 0.036725957756467),
        ((0.781036849029926, 0.109481575485037, 0.109481575485037), 0.045321059435528),
        ((0.141707219414880, 0.307939838764121, 0.550352941820999), 0.072757916845420),
        ((0.025003534762686, 0.246672560639903, 0.728323904597411), 0.028327242531057),
        ((0.009540815400299, 0.066803251012200, 0.923655933587500), 0.009421666963733),
    ],
}


def _expand_orbits(entries):
    pts, ws = [], []
    for (a, b, c), w in entries:
        if abs(a - b) < 1e-12 and abs(b - c) < 1e-12:
            orbit = [(a, b, c)]
        elif abs(b - c) < 1e-12:
            orbit = [(a, b, b), (b, a, b), (b, b, a)]
        else:
            orbit = [(a, b, c), (c, a, b), (b, c, a), (a, c, b), (b, a, c), (c, b, a)]
        pts.extend(orbit)
        ws.extend([w] * len(orbit))
    pts = np.array(pts)
    ws = np.array(ws)
    return pts, ws / ws.sum()


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> TriangleRule:
    """Tabulated symmetric triangle rule exact to the given degree.

    Supported degrees: 2, 5, 8, 10.
    """
    if degree not in _DUNAVANT:
        raise UnsupportedDegree(f"no triangle rule of degree {degree}; supported: {sorted(_DUNAVANT)}")
    pts, ws = _expand_orbits(_DUNAVANT[degree])
    return TriangleRule(pts, ws, degree)


# barycentric vertices of the four children of a midpoint subdivision
_SUBDIV = np.array(
    [
        [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5]],
        [[0.5, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.5, 0.5]],
        [[0.5, 0.0, 0.5], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]],
        [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]],
    ]
)


@lru_cache(maxsize=None)
def subdivide_rule(degree: int) -> TriangleRule:
    """Composite rule: the tabulated rule applied on the 4 midpoint children."""
    base = triangle_rule(degree)
    pts = np.concatenate([base.bary_nodes @ sub for sub in _SUBDIV])
    ws = np.concatenate([base.weights / 4.0] * 4)
    return TriangleRule(pts, ws, degree)


@dataclass(frozen=True)
class RuleSet:
    """Fixed-order 1-D rules used to evaluate degree-of-freedom functionals."""

    order: int = 20

    def edge_rule(self) -> SegmentRule:
        return gauss_legendre_01(self.order)

    def weighted_rule(self, exponent: float) -> SegmentRule:
        return gauss_jacobi_01(float(exponent), self.order)


DEFAULT_RULES = RuleSet()

"""Triangular element definitions and their dual bases.

The baseline element is piecewise linear with edge-mean degrees of freedom
(the classical nonconforming Crouzeix-Raviart element). Quadratic
enrichments add three more functionals; a triple is admissible exactly when
the 3x3 duality matrix N[j][i] = F_j(vertex basis_i) is nonsingular. Two
closed-form families are provided:

* ``gn:<gamma>`` - weighted integrals over the segments joining edge
  midpoints, weight t^g (1-t)^g, admissible for gamma > -1, gamma != 0;
* ``pn:<mu>``    - weighted integrals over the segments joining each edge
  midpoint to the barycenter, admissible for every mu > -1;

plus ``af3`` (vertex evaluations) and ``custom`` (any functional triple,
run through the generic pipeline).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, InadmissibleFunctionals
from .geometry import Barycentric, Triangle, barycentric_coords, normalize_orientation
from .quadrature import DEFAULT_RULES, RuleSet, sigma
from .validation import as_field

#: relative determinant threshold: |det N| must exceed this times (max|entry|)^3
ADMISSIBILITY_FACTOR = 1e-12

#: gn coefficients blow up like 1/gamma near 0; reject inside this band
GN_GAMMA_BAND = 1e-6

REFERENCE_TRIANGLE = normalize_orientation(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))

_KINDS = ("edge_mean", "vertex_eval", "midsegment_weighted", "median_weighted")


@dataclass(frozen=True)
class DofFunctional:
    """One degree of freedom: a linear functional on fields over a triangle.

    ``midsegment_weighted`` deliberately accepts parameter 0 so that the
    resulting singular duality matrix can be exhibited; element
    constructors reject it.
    """

    kind: str
    j: int
    parameter: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.j not in (1, 2, 3):
            raise ValueError(f"functional index must be 1..3, got {self.j}")
        if self.kind in ("midsegment_weighted", "median_weighted"):
            if self.parameter is None or not self.parameter > -1.0:
                raise DomainError(f"{self.kind} needs a weight exponent > -1, got {self.parameter}")
        elif self.parameter is not None:
            raise ValueError(f"{self.kind} takes no parameter")


def edge_mean(j: int) -> DofFunctional:
    return DofFunctional("edge_mean", j)


def vertex_eval(j: int) -> DofFunctional:
    return DofFunctional("vertex_eval", j)


def midsegment_weighted(j: int, gamma: float) -> DofFunctional:
    return DofFunctional("midsegment_weighted", j, float(gamma))


def median_weighted(j: int, mu: float) -> DofFunctional:
    return DofFunctional("median_weighted", j, float(mu))


def gn_functionals(gamma: float):
    return tuple(midsegment_weighted(j, gamma) for j in (1, 2, 3))


def pn_functionals(mu: float):
    return tuple(median_weighted(j, mu) for j in (1, 2, 3))


def vertex_functionals():
    return tuple(vertex_eval(j) for j in (1, 2, 3))


def parse_functional(text: str) -> DofFunctional:
    """Parse 'kind:j' or 'kind:j:parameter' into a DofFunctional."""
    parts = [p.strip() for p in text.split(":")]
    if len(parts) not in (2, 3):
        raise ValueError(f"functional spec must be kind:j[:parameter], got {text!r}")
    kind, j = parts[0], int(parts[1])
    param = float(parts[2]) if len(parts) == 3 else None
    return DofFunctional(kind, j, param)


# quadratic basis dual to (vertex evaluations, edge means): "vertex" part
# is 1 at its own vertex with zero edge means, "bubble" part has unit mean
# on its own edge and vanishes at all vertices.

def af3_vertex_poly(i: int, lams: np.ndarray) -> np.ndarray:
    li = lams[..., i - 1]
    lj = lams[..., i % 3]
    lk = lams[..., (i + 1) % 3]
    return li * (1.0 - 3.0 * lj - 3.0 * lk)


def af3_bubble_poly(i: int, lams: np.ndarray) -> np.ndarray:
    lj = lams[..., i % 3]
    lk = lams[..., (i + 1) % 3]
    return 6.0 * lj * lk


def _vertex_rows(lams: np.ndarray) -> np.ndarray:
    """Rows of the three vertex-type quadratics at points lams (m, 3)."""
    return np.stack([af3_vertex_poly(i, lams) for i in (1, 2, 3)])


def _bubble_rows(lams: np.ndarray) -> np.ndarray:
    return np.stack([af3_bubble_poly(i, lams) for i in (1, 2, 3)])


def cr_basis(i: int, b: Barycentric) -> float:
    """Edge-mean-dual linear basis: 1 - 2*lambda_i."""
    return 1.0 - 2.0 * b.get(i)


def af3_basis(i: int, b: Barycentric) -> tuple[float, float]:
    """(vertex_i, bubble_i) values of the quadratic vertex/edge-mean pair."""
    lams = b.as_array()
    return float(af3_vertex_poly(i, lams)), float(af3_bubble_poly(i, lams))


def apply_functional(F: DofFunctional, f, t: Triangle, rules: RuleSet = DEFAULT_RULES) -> float:
    """Evaluate a degree-of-freedom functional of the field f on triangle t.

    f is called as f(x, y); vectorized callables are evaluated in one shot.
    """
    field = as_field(f)
    if F.kind == "vertex_eval":
        v = t.vertex(F.j)
        return float(field(np.array([v.x]), np.array([v.y]))[0])
    if F.kind == "edge_mean":
        a, b = t.vertex(F.j + 1), t.vertex(F.j + 2)
        rule = rules.edge_rule()
    elif F.kind == "midsegment_weighted":
        a, b = t.midpoint(F.j + 1), t.midpoint(F.j + 2)
        rule = rules.weighted_rule(F.parameter)
    else:
        a, b = t.midpoint(F.j), t.barycenter
        rule = rules.weighted_rule(F.parameter)
    s = rule.nodes
    return rule.integrate(field(s * a.x + (1.0 - s) * b.x, s * a.y + (1.0 - s) * b.y))


def _vertex_poly_field(t: Triangle, i: int):
    def f(xs, ys):
        return af3_vertex_poly(i, barycentric_coords(t, xs, ys))

    return f


def _bubble_poly_field(t: Triangle, i: int):
    def f(xs, ys):
        return af3_bubble_poly(i, barycentric_coords(t, xs, ys))

    return f


def build_N(functionals, t: Triangle | None = None, rules: RuleSet = DEFAULT_RULES) -> np.ndarray:
    """Duality matrix N[j][i] = F_j(vertex basis_i), computed by quadrature.

    All four functional kinds are barycentric-affine, so the result does
    not depend on the triangle (the default is the reference triangle).
    """
    tri = REFERENCE_TRIANGLE if t is None else t
    N = np.empty((3, 3))
    for j, F in enumerate(functionals):
        for i in (1, 2, 3):
            N[j, i - 1] = apply_functional(F, _vertex_poly_field(tri, i), tri, rules)
    return N


def det3(N: np.ndarray) -> float:
    """Determinant by direct 3x3 expansion."""
    return float(
        N[0, 0] * (N[1, 1] * N[2, 2] - N[1, 2] * N[2, 1])
        - N[0, 1] * (N[1, 0] * N[2, 2] - N[1, 2] * N[2, 0])
        + N[0, 2] * (N[1, 0] * N[2, 1] - N[1, 1] * N[2, 0])
    )


def inv3(N: np.ndarray) -> np.ndarray:
    """Inverse via the adjugate with an explicit determinant."""
    d = det3(N)
    adj = np.array(
        [
            [
                N[1, 1] * N[2, 2] - N[1, 2] * N[2, 1],
                N[0, 2] * N[2, 1] - N[0, 1] * N[2, 2],
                N[0, 1] * N[1, 2] - N[0, 2] * N[1, 1],
            ],
            [
                N[1, 2] * N[2, 0] - N[1, 0] * N[2, 2],
                N[0, 0] * N[2, 2] - N[0, 2] * N[2, 0],
                N[0, 2] * N[1, 0] - N[0, 0] * N[1, 2],
            ],
            [
                N[1, 0] * N[2, 1] - N[1, 1] * N[2, 0],
                N[0, 1] * N[2, 0] - N[0, 0] * N[2, 1],
                N[0, 0] * N[1, 1] - N[0, 1] * N[1, 0],
            ],
        ]
    )
    return adj / d


def admissibility(N: np.ndarray) -> tuple[float, bool]:
    """Determinant of N and a scale-aware nonsingularity flag."""
    d = det3(N)
    scale = float(np.abs(N).max())
    return d, abs(d) > ADMISSIBILITY_FACTOR * scale**3


@dataclass(frozen=True)
class BasisEval:
    """Values of the six dual basis functions at one barycentric point:
    rho_i (dual to edge means) and tau_i (dual to the enriched triple)."""

    rho: np.ndarray
    tau: np.ndarray


@dataclass(frozen=True)
class CRElement:
    """Piecewise-linear element with edge-mean degrees of freedom."""

    label: str = "cr"

    @property
    def n_dofs(self) -> int:
        return 3

    def dof_functionals(self):
        return tuple(edge_mean(j) for j in (1, 2, 3))

    def basis_matrix(self, lams) -> np.ndarray:
        """Basis values at points lams (m, 3); returns (3, m)."""
        return 1.0 - 2.0 * np.asarray(lams, dtype=float).T


CR_ELEMENT = CRElement()


@dataclass(frozen=True, eq=False)
class EnrichedElement:
    """Quadratic element: edge means plus one admissible enriched triple.

    N is the duality matrix, N_inv its inverse (columns c_i), and w rows
    hold the vertex-basis coefficients of the edge-dual functions rho_i.
    """

    functionals: tuple[DofFunctional, DofFunctional, DofFunctional]
    N: np.ndarray
    N_inv: np.ndarray
    w: np.ndarray
    label: str

    def __post_init__(self):
        for arr in (self.N, self.N_inv, self.w):
            arr.setflags(write=False)
        resid = np.abs(self.N @ self.N_inv - np.eye(3)).max()
        if not resid < 1e-8:
            raise ValueError(f"N * N_inv deviates from identity by {resid:g}")

    @property
    def n_dofs(self) -> int:
        return 6

    def dof_functionals(self):
        return tuple(edge_mean(j) for j in (1, 2, 3)) + self.functionals

    def basis_matrix(self, lams) -> np.ndarray:
        """Rows (rho_1..3, tau_1..3) evaluated at points lams (m, 3)."""
        lams = np.asarray(lams, dtype=float)
        vert = _vertex_rows(lams)
        rho = self.w @ vert + _bubble_rows(lams)
        tau = self.N_inv.T @ vert
        return np.concatenate([rho, tau])

    def basis(self, b: Barycentric) -> BasisEval:
        m = self.basis_matrix(b.as_array()[None, :])
        return BasisEval(m[:3, 0].copy(), m[3:, 0].copy())


def general_enriched_basis(
    functionals,
    t: Triangle | None = None,
    rules: RuleSet = DEFAULT_RULES,
    label: str = "custom",
) -> EnrichedElement:
    """Build the dual basis of an arbitrary enriched triple.

    N comes from quadrature, its inverse from the adjugate, and the
    edge-dual coefficients from w_i = -N_inv @ [F_j(bubble_i)]_j.
    Raises InadmissibleFunctionals when N is (numerically) singular.
    """
    functionals = tuple(functionals)
    if len(functionals) != 3:
        raise ValueError(f"need exactly 3 enriched functionals, got {len(functionals)}")
    tri = REFERENCE_TRIANGLE if t is None else t
    N = build_N(functionals, tri, rules)
    det, ok = admissibility(N)
    if not ok:
        raise InadmissibleFunctionals(f"{label}: duality matrix is singular (det = {det:.3e})")
    N_inv = inv3(N)
    G = np.empty((3, 3))
    for j, F in enumerate(functionals):
        for i in (1, 2, 3):
            G[j, i - 1] = apply_functional(F, _bubble_poly_field(tri, i), tri, rules)
    w = -(N_inv @ G).T
    return EnrichedElement(functionals, N, N_inv, w, label)


# --- closed-form constants of the two families ---------------------------


@dataclass(frozen=True)
class GNConstants:
    """Scalars of the midsegment-weighted family at a given exponent."""

    gamma: float
    sigma: float
    k: float
    c: float
    d: float
    delta: float
    det: float
    n_diag: float
    n_off: float
    ninv_diag: float
    ninv_off: float
    bubble_diag: float
    bubble_off: float


@dataclass(frozen=True)
class PNConstants:
    """Scalars of the median-weighted family at a given exponent."""

    mu: float
    sigma: float
    d: float
    h: float
    r: float
    q: float
    omega: float
    det: float
    n_diag: float
    n_off: float
    ninv_diag: float
    ninv_off: float
    bubble_diag: float
    bubble_off: float


def gn_constants(gamma: float) -> GNConstants:
    gamma = float(gamma)
    if not gamma > -1.0:
        raise DomainError(f"gn family needs gamma > -1, got {gamma}")
    if abs(gamma) < GN_GAMMA_BAND:
        raise InadmissibleFunctionals(
            f"gn family is singular at gamma = 0 and ill-conditioned for |gamma| < {GN_GAMMA_BAND}, got {gamma}"
        )
    s = sigma(gamma)
    k = -(5.0 * gamma + 6.0) / (8.0 * (2.0 * gamma + 3.0))
    c = 3.0 * (11.0 * gamma**2 + 33.0 * gamma + 24.0) / (gamma * (7.0 * gamma + 9.0))
    d = -3.0 * (gamma + 3.0) * (3.0 * gamma + 4.0) / (gamma * (7.0 * gamma + 9.0))
    delta = gamma * (7.0 * gamma + 9.0) / (8.0 * (2.0 * gamma + 3.0) ** 2)
    # eigenvalues of N are (n_diag + 2 n_off) and (n_diag - n_off) twice,
    # hence the overall negative sign
    det = -(gamma**2) * (7.0 * gamma + 9.0) * s**3 / (256.0 * (2.0 * gamma + 3.0) ** 3)
    return GNConstants(
        gamma=gamma,
        sigma=s,
        k=k,
        c=c,
        d=d,
        delta=delta,
        det=det,
        n_diag=-s / 4.0,
        n_off=s * k,
        ninv_diag=(1.0 - 4.0 * k) / (s * delta),
        ninv_off=4.0 * k / (s * delta),
        bubble_diag=3.0 * (gamma + 1.0) * s / (4.0 * (2.0 * gamma + 3.0)),
        bubble_off=0.75 * s,
    )


def pn_constants(mu: float) -> PNConstants:
    mu = float(mu)
    if not mu > -1.0:
        raise DomainError(f"pn family needs mu > -1, got {mu}")
    s = sigma(mu)
    d = -(3.0 * mu + 4.0) / (3.0 * (2.0 * mu + 3.0))
    h = -(15.0 * mu + 22.0) / (12.0 * (2.0 * mu + 3.0))
    r = -(125.0 * mu**2 + 372.0 * mu + 276.0) / (3.0 * (mu + 2.0) * (7.0 * mu + 10.0))
    q = (85.0 * mu**2 + 264.0 * mu + 204.0) / (3.0 * (mu + 2.0) * (7.0 * mu + 10.0))
    omega = -(mu + 2.0) * (7.0 * mu + 10.0) / (8.0 * (2.0 * mu + 3.0) ** 2)
    det = -((mu + 2.0) ** 2) * (7.0 * mu + 10.0) * s**3 / (256.0 * (2.0 * mu + 3.0) ** 3)
    return PNConstants(
        mu=mu,
        sigma=s,
        d=d,
        h=h,
        r=r,
        q=q,
        omega=omega,
        det=det,
        n_diag=s * d / 2.0,
        n_off=s * h / 2.0,
        ninv_diag=2.0 * (d + h) / (s * omega),
        ninv_off=-2.0 * h / (s * omega),
        bubble_diag=(25.0 * mu + 38.0) * s / (12.0 * (2.0 * mu + 3.0)),
        bubble_off=(5.0 * mu + 7.0) * s / (6.0 * (2.0 * mu + 3.0)),
    )


def family_constants(kind: str, parameter: float):
    """Closed-form scalars for a family: kind 'gn' or 'pn' (or the
    corresponding functional kind names)."""
    if kind in ("gn", "midsegment_weighted"):
        return gn_constants(parameter)
    if kind in ("pn", "median_weighted"):
        return pn_constants(parameter)
    raise ValueError(f"unknown family {kind!r}")


def gn_basis(gamma: float, b: Barycentric) -> BasisEval:
    """Closed-form dual basis of the midsegment-weighted family (no
    matrix inversion)."""
    cst = gn_constants(gamma)
    lams = b.as_array()
    vert = np.array([af3_vertex_poly(i, lams) for i in (1, 2, 3)])
    bub = np.array([af3_bubble_poly(i, lams) for i in (1, 2, 3)])
    tot = vert.sum()
    rho = (cst.c - cst.d) * vert + cst.d * tot + bub
    tau = ((1.0 - 8.0 * cst.k) * vert + 4.0 * cst.k * tot) / (cst.sigma * cst.delta)
    return BasisEval(rho, tau)


def pn_basis(mu: float, b: Barycentric) -> BasisEval:
    """Closed-form dual basis of the median-weighted family."""
    cst = pn_constants(mu)
    lams = b.as_array()
    vert = np.array([af3_vertex_poly(i, lams) for i in (1, 2, 3)])
    bub = np.array([af3_bubble_poly(i, lams) for i in (1, 2, 3)])
    tot = vert.sum()
    rho = (cst.r - cst.q) * vert + cst.q * tot + bub
    tau = 2.0 * ((cst.d + 2.0 * cst.h) * vert - cst.h * tot) / (cst.sigma * cst.omega)
    return BasisEval(rho, tau)


_EYE = np.eye(3)
_ONES = np.ones((3, 3))


@lru_cache(maxsize=128)
def gn_element(gamma: float) -> EnrichedElement:
    """Midsegment-weighted element from its closed-form matrices."""
    cst = gn_constants(gamma)
    N = cst.n_diag * _EYE + cst.n_off * (_ONES - _EYE)
    N_inv = cst.ninv_diag * _EYE + cst.ninv_off * (_ONES - _EYE)
    w = cst.c * _EYE + cst.d * (_ONES - _EYE)
    return EnrichedElement(gn_functionals(cst.gamma), N, N_inv, w, f"gn:{cst.gamma:g}")


@lru_cache(maxsize=128)
def pn_element(mu: float) -> EnrichedElement:
    """Median-weighted element from its closed-form matrices."""
    cst = pn_constants(mu)
    N = cst.n_diag * _EYE + cst.n_off * (_ONES - _EYE)
    N_inv = cst.ninv_diag * _EYE + cst.ninv_off * (_ONES - _EYE)
    w = cst.r * _EYE + cst.q * (_ONES - _EYE)
    return EnrichedElement(pn_functionals(cst.mu), N, N_inv, w, f"pn:{cst.mu:g}")


@lru_cache(maxsize=1)
def af3_element() -> EnrichedElement:
    """Vertex-evaluation enrichment: the duality matrix is the identity and
    the bubbles vanish at all vertices, so rho_i = bubble_i, tau_i = vertex_i."""
    return EnrichedElement(vertex_functionals(), _EYE.copy(), _EYE.copy(), np.zeros((3, 3)), "af3")


Element = CRElement | EnrichedElement


def make_element(spec: str, rules: RuleSet = DEFAULT_RULES, custom_functionals=None) -> Element:
    """Build an element from a selection string.

    Accepted forms: ``cr``, ``af3``, ``gn:<gamma>``, ``pn:<mu>``, and
    ``custom`` (which requires an explicit functional triple).
    """
    spec = spec.strip()
    if spec == "cr":
        return CR_ELEMENT
    if spec == "af3":
        return af3_element()
    if spec.startswith("gn:"):
        return gn_element(_parse_param(spec))
    if spec.startswith("pn:"):
        return pn_element(_parse_param(spec))
    if spec == "custom":
        if not custom_functionals:
            raise ValueError("element 'custom' requires a functional triple")
        return general_enriched_basis(custom_functionals, rules=rules, label="custom")
    raise ValueError(f"unknown element spec {spec!r}")


def _parse_param(spec: str) -> float:
    head, _, tail = spec.partition(":")
    try:
        return float(tail)
    except ValueError:
        raise ValueError(f"bad {head} parameter in element spec {spec!r}") from None

"""Local and global interpolation operators plus error measurement.

A local approximant stores the degree-of-freedom values of the target
field, never monomial coefficients; evaluation contracts them against the
element's dual basis. Global fields apply the local operator triangle by
triangle, which keeps the result discontinuous across edges except for the
shared edge means.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, InterpolationError
from .elements import Element, apply_functional
from .geometry import Barycentric, Mesh, Triangle, barycentric_coords, locate
from .quadrature import DEFAULT_RULES, RuleSet, TriangleRule, subdivide_rule, triangle_rule
from .validation import as_field


@dataclass(frozen=True, eq=False)
class LocalApproximant:
    """Degree-of-freedom values of a field on one triangle.

    dofs holds the three edge means, followed by the three enriched
    functional values for quadratic elements.
    """

    element: Element
    dofs: np.ndarray

    def __post_init__(self):
        self.dofs.setflags(write=False)
        if self.dofs.shape != (self.element.n_dofs,):
            raise ValueError(f"expected {self.element.n_dofs} dof values, got {self.dofs.shape}")
        if not np.isfinite(self.dofs).all():
            raise ValueError("non-finite degree-of-freedom value")

    def evaluate_lams(self, lams) -> np.ndarray:
        """Evaluate at barycentric points lams (m, 3)."""
        return self.dofs @ self.element.basis_matrix(lams)

    def evaluate(self, b: Barycentric) -> float:
        return float(self.evaluate_lams(b.as_array()[None, :])[0])


def local_interpolate(f, t: Triangle, element: Element, rules: RuleSet = DEFAULT_RULES) -> LocalApproximant:
    """Interpolate f on one triangle by matching all element functionals."""
    dofs = np.array([apply_functional(F, f, t, rules) for F in element.dof_functionals()])
    return LocalApproximant(element, dofs)


def interpolation_property_check(f, t: Triangle, element: Element, rules: RuleSet = DEFAULT_RULES) -> np.ndarray:
    """Residuals |DOF(interpolant) - DOF(f)| for every element functional."""
    approx = local_interpolate(f, t, element, rules)

    def g(xs, ys):
        return approx.evaluate_lams(barycentric_coords(t, xs, ys))

    return np.array(
        [abs(apply_functional(F, g, t, rules) - approx.dofs[i]) for i, F in enumerate(element.dof_functionals())]
    )


@dataclass(frozen=True, eq=False)
class PiecewiseField:
    """Per-triangle approximants over a mesh (nonconforming glue)."""

    mesh: Mesh
    approximants: tuple[LocalApproximant, ...]
    element: Element

    def __post_init__(self):
        if len(self.approximants) != self.mesh.n_triangles:
            raise ValueError("one approximant per triangle required")

    @property
    def label(self) -> str:
        return self.element.label

    @cached_property
    def dof_matrix(self) -> np.ndarray:
        """(n_triangles, n_dofs) array of all degree-of-freedom values."""
        m = np.array([a.dofs for a in self.approximants])
        m.setflags(write=False)
        return m

    def evaluate_at(self, i: int, b: Barycentric) -> float:
        return self.approximants[i].evaluate(b)

    def evaluate(self, p) -> float:
        i, lam = locate(self.mesh, p)
        return self.approximants[i].evaluate(lam)

    def evaluate_points(self, X) -> np.ndarray:
        pts = np.asarray(X, dtype=float)
        out = np.empty(pts.shape[0])
        for k, (x, y) in enumerate(pts):
            out[k] = self.evaluate((x, y))
        return out


def global_interpolate(mesh: Mesh, f, element: Element, rules: RuleSet = DEFAULT_RULES) -> PiecewiseField:
    """Interpolate f on every triangle of the mesh.

    The fast path evaluates f in bulk on all functional nodes at once; if
    that fails the slow path retries per triangle so the failing index
    can be reported.
    """
    field = as_field(f)
    try:
        cols = [_dofs_for(mesh, field, F, rules) for F in element.dof_functionals()]
        dof_rows = np.column_stack(cols)
        if not np.isfinite(dof_rows).all():
            raise ValueError("non-finite degree-of-freedom value")
    except Exception:
        dof_rows = _interpolate_rows(mesh, f, element, rules)
    approx = tuple(LocalApproximant(element, dof_rows[i].copy()) for i in range(mesh.n_triangles))
    return PiecewiseField(mesh, approx, element)


def _interpolate_rows(mesh, f, element, rules):
    rows = []
    for i in range(mesh.n_triangles):
        try:
            rows.append(local_interpolate(f, mesh.triangle(i), element, rules).dofs)
        except Exception as e:
            raise InterpolationError(i, str(e)) from e
    return np.array(rows)


def _dofs_for(mesh, field, F, rules):
    """One functional applied to the field on every triangle at once."""
    V = mesh.triangle_vertices()
    if F.kind == "vertex_eval":
        P = V[:, F.j - 1]
        return field(P[:, 0], P[:, 1])
    if F.kind == "edge_mean":
        a = V[:, F.j % 3]
        b = V[:, (F.j + 1) % 3]
        rule = rules.edge_rule()
    else:
        mid = 0.5 * (V[:, [1, 2, 0]] + V[:, [2, 0, 1]])  # mid[:, k] faces vertex k+1
        if F.kind == "midsegment_weighted":
            a = mid[:, F.j % 3]
            b = mid[:, (F.j + 1) % 3]
        else:
            a = mid[:, F.j - 1]
            b = V.mean(axis=1)
        rule = rules.weighted_rule(F.parameter)
    s = rule.nodes
    xs = a[:, 0, None] * s + b[:, 0, None] * (1.0 - s)
    ys = a[:, 1, None] * s + b[:, 1, None] * (1.0 - s)
    return field(xs, ys) @ rule.weights


@dataclass(frozen=True)
class ErrorReport:
    """L1 error of a field against the target, plus measurement context.

    linf_sampled is the largest deviation seen at the quadrature nodes
    only; it is not a true supremum.
    """

    l1: float
    linf_sampled: float
    n_triangles: int
    h_max: float
    quadrature_degree: int
    subdivided: bool = False


def l1_error(field: PiecewiseField, f, rule: TriangleRule | None = None, subdivide: bool = False) -> ErrorReport:
    """Unnormalized integral of |f - field| over the mesh.

    Summation runs in fixed triangle order, so repeated calls give
    bit-identical results.
    """
    if rule is None:
        rule = triangle_rule(8)
    r = subdivide_rule(rule.degree) if subdivide else rule
    mesh = field.mesh
    target = as_field(f)
    bary = r.bary_nodes
    pts = np.einsum("qb,mbx->mqx", bary, mesh.triangle_vertices())
    fv = target(pts[..., 0], pts[..., 1])
    approx = field.dof_matrix @ field.element.basis_matrix(bary)
    diff = np.abs(fv - approx)
    per_triangle = diff @ r.weights
    return ErrorReport(
        l1=float(np.dot(mesh.areas, per_triangle)),
        linf_sampled=float(diff.max()),
        n_triangles=mesh.n_triangles,
        h_max=mesh.h_max,
        quadrature_degree=rule.degree,
        subdivided=subdivide,
    )


@dataclass(frozen=True)
class Slopes:
    """Observed convergence orders from an error/mesh-size sequence."""

    pairwise: tuple[float, ...]
    least_squares: float


def convergence_order(errors, h) -> Slopes:
    """Pairwise and least-squares slopes of log(error) against log(h)."""
    e = np.asarray(errors, dtype=float)
    hs = np.asarray(h, dtype=float)
    if e.shape != hs.shape or e.ndim != 1 or e.size < 2:
        raise ValueError("need matching 1-D sequences with at least 2 levels")
    if not (np.diff(hs) < 0).all():
        raise ValueError("h must be strictly decreasing")
    if (e <= 0).any():
        raise DomainError("zero or negative error (approximation is exact); order undefined")
    pairwise = tuple(
        float(math.log(e[i] / e[i + 1]) / math.log(hs[i] / hs[i + 1])) for i in range(e.size - 1)
    )
    ls = float(np.polyfit(np.log(hs), np.log(e), 1)[0])
    return Slopes(pairwise, ls)


def serialize_field(field: PiecewiseField) -> str:
    """Debug dump: one line per triangle with its dof values."""
    lines = [
        f"# piecewise field: element {field.label}, "
        f"{field.mesh.n_triangles} triangles, {field.element.n_dofs} dofs per triangle",
        "# triangle_index dof_values...",
    ]
    for i, a in enumerate(field.approximants):
        lines.append(" ".join([str(i)] + [repr(float(v)) for v in a.dofs]))
    return "\n".join(lines) + "\n"

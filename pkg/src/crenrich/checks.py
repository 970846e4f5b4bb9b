"""Invariant self-checks behind the `check` CLI subcommand.

Each check returns (name, passed, detail); run_all executes the suite with
a fixed seed so results are reproducible.
"""
from __future__ import annotations

import numpy as np

from . import elements as el
from .approximation import local_interpolate
from .errors import InadmissibleFunctionals
from .geometry import Barycentric, barycentric, barycentric_coords, min_angle_degrees, normalize_orientation
from .quadrature import DEFAULT_RULES, beta, gauss_jacobi_01, sigma, triangle_rule

GN_GRID = (0.5, 1.0, 2.0, 5.0)
PN_GRID = (0.0, 0.5, 2.0, 5.0)


def random_triangle(rng, scale=2.0, min_angle=20.0):
    """Random nondegenerate triangle with no angle below min_angle
    (the barycentric solve is only guaranteed stable away from slivers)."""
    while True:
        pts = rng.uniform(-scale, scale, size=(3, 2))
        try:
            t = normalize_orientation(pts)
        except Exception:
            continue
        if min_angle_degrees(t) >= min_angle:
            return t


def random_barycentric(rng) -> Barycentric:
    a, b = sorted(rng.uniform(0.0, 1.0, size=2))
    return Barycentric(a, b - a, 1.0 - b)


def basis_field(element, t, row: int):
    """Basis function `row` of the element as a physical field on t."""

    def f(xs, ys):
        return element.basis_matrix(barycentric_coords(t, xs, ys))[row]

    return f


def duality_residual(element, t, rules=DEFAULT_RULES) -> float:
    """Largest deviation of DOF(basis) from the identity matrix pattern."""
    funcs = element.dof_functionals()
    n = element.n_dofs
    worst = 0.0
    for row in range(n):
        g = basis_field(element, t, row)
        for col, F in enumerate(funcs):
            val = el.apply_functional(F, g, t, rules)
            want = 1.0 if row == col else 0.0
            worst = max(worst, abs(val - want))
    return worst


def check_barycentric(rng):
    worst_sum = worst_rec = worst_aff = 0.0
    for _ in range(200):
        t = random_triangle(rng)
        p = rng.uniform(-2, 2, size=2)
        lam = barycentric(t, p)
        worst_sum = max(worst_sum, abs(lam.l1 + lam.l2 + lam.l3 - 1.0))
        rec = lam.l1 * t.v1.as_array() + lam.l2 * t.v2.as_array() + lam.l3 * t.v3.as_array()
        worst_rec = max(worst_rec, float(np.abs(rec - p).max()) / t.diameter)
        x, y, s = rng.uniform(-1, 1, size=2), rng.uniform(-1, 1, size=2), rng.uniform()
        mix = barycentric(t, s * x + (1 - s) * y).as_array()
        direct = s * barycentric(t, x).as_array() + (1 - s) * barycentric(t, y).as_array()
        worst_aff = max(worst_aff, float(np.abs(mix - direct).max()))
    ok = worst_sum <= 1e-12 and worst_rec <= 1e-10 and worst_aff <= 1e-12
    return "barycentric coordinates", ok, f"sum {worst_sum:.1e}, reproduction {worst_rec:.1e}, affine {worst_aff:.1e}"


def check_beta(rng):
    exact = abs(beta(1, 1) - 1.0) + abs(beta(3, 3) - 1 / 30) + abs(beta(2, 2) - 1 / 6)
    worst_sym = worst_rec = 0.0
    for _ in range(100):
        z1, z2 = rng.uniform(0.05, 20.0, size=2)
        worst_sym = max(worst_sym, abs(beta(z1, z2) - beta(z2, z1)) / beta(z1, z2))
        worst_rec = max(worst_rec, abs(beta(z1 + 1, z2) - z1 / (z1 + z2) * beta(z1, z2)) / beta(z1, z2))
    ok = exact <= 1e-14 and worst_sym <= 1e-13 and worst_rec <= 1e-13
    return "beta function", ok, f"exact {exact:.1e}, symmetry {worst_sym:.1e}, recurrence {worst_rec:.1e}"


def check_weighted_quadrature(rng):
    worst = 0.0
    for g in (-0.9, -0.5, 0.0, 0.5, 1.0, 2.0, 5.0):
        rule = gauss_jacobi_01(g, 20)
        moment = sigma(g)
        for k in range(11):
            approx = rule.integrate(rule.nodes**k)
            worst = max(worst, abs(approx - moment) / moment)
            # beta recurrence B(z1+1, z2) = z1/(z1+z2) B(z1, z2)
            moment *= (g + 1.0 + k) / (2.0 * g + 2.0 + k)
    ok = worst <= 1e-12
    return "weighted 1-D quadrature moments", ok, f"max relative moment error {worst:.1e}"


def check_triangle_rules(rng):
    from math import factorial

    worst = 0.0
    for degree in (2, 5, 8, 10):
        r = triangle_rule(degree)
        worst = max(worst, abs(float(r.weights.sum()) - 1.0))
        for a in range(degree + 1):
            for b in range(degree + 1 - a):
                approx = float(np.dot(r.weights, r.bary_nodes[:, 0] ** a * r.bary_nodes[:, 1] ** b))
                exact = 2.0 * factorial(a) * factorial(b) / factorial(a + b + 2)
                worst = max(worst, abs(approx - exact))
    ok = worst <= 1e-13
    return "triangle rules", ok, f"max exactness defect {worst:.1e}"


def check_duality(rng):
    worst = 0.0
    for _ in range(5):
        t = random_triangle(rng)
        for g in GN_GRID:
            worst = max(worst, duality_residual(el.gn_element(g), t))
        for m in PN_GRID:
            worst = max(worst, duality_residual(el.pn_element(m), t))
    ok = worst <= 1e-9
    return "dual basis biorthogonality", ok, f"max residual {worst:.1e}"


def check_closed_vs_generic(rng):
    worst_basis = worst_mat = 0.0
    for g in GN_GRID:
        generic = el.general_enriched_basis(el.gn_functionals(g))
        closed = el.gn_element(g)
        worst_mat = max(worst_mat, float(np.abs(generic.N - closed.N).max()) / float(np.abs(closed.N).max()))
        worst_mat = max(
            worst_mat, float(np.abs(generic.N_inv - closed.N_inv).max()) / float(np.abs(closed.N_inv).max())
        )
        for _ in range(25):
            b = random_barycentric(rng)
            ref = el.gn_basis(g, b)
            got = generic.basis(b)
            worst_basis = max(worst_basis, float(np.abs(ref.rho - got.rho).max()), float(np.abs(ref.tau - got.tau).max()))
    for m in PN_GRID:
        generic = el.general_enriched_basis(el.pn_functionals(m))
        closed = el.pn_element(m)
        worst_mat = max(worst_mat, float(np.abs(generic.N - closed.N).max()) / float(np.abs(closed.N).max()))
        for _ in range(25):
            b = random_barycentric(rng)
            ref = el.pn_basis(m, b)
            got = generic.basis(b)
            worst_basis = max(worst_basis, float(np.abs(ref.rho - got.rho).max()), float(np.abs(ref.tau - got.tau).max()))
    ok = worst_basis <= 1e-10 and worst_mat <= 1e-12
    return "closed forms vs generic pipeline", ok, f"basis {worst_basis:.1e}, matrices {worst_mat:.1e}"


def check_admissibility_boundary(rng):
    N0 = el.build_N(el.gn_functionals(0.0))
    det0, ok0 = el.admissibility(N0)
    scale = float(np.abs(N0).max()) ** 3
    rejected = False
    try:
        el.general_enriched_basis(el.gn_functionals(0.0))
    except InadmissibleFunctionals:
        rejected = True
    pn_ok = True
    for m in (-0.9, -0.5, 0.0, 1.0, 10.0):
        _, adm = el.admissibility(el.build_N(el.pn_functionals(m)))
        pn_ok = pn_ok and adm
    ok = abs(det0) <= 1e-14 * scale and not ok0 and rejected and pn_ok
    return "admissibility boundary", ok, f"det at gamma=0: {det0:.1e}, pn grid admissible: {pn_ok}"


def check_polynomial_reproduction(rng):
    worst_p2 = worst_p1 = 0.0
    for _ in range(10):
        t = random_triangle(rng)
        coeffs = rng.uniform(-1, 1, size=6)

        def p2(xs, ys, t=t, c=coeffs):
            lam = barycentric_coords(t, xs, ys)
            return lam @ c[:3] + lam**2 @ c[3:]

        for spec in ("af3", "gn:2", "pn:2"):
            approx = local_interpolate(p2, t, el.make_element(spec))
            for _ in range(5):
                b = random_barycentric(rng)
                lam = b.as_array()
                want = float((coeffs[:3] * lam).sum() + (coeffs[3:] * lam**2).sum())
                worst_p2 = max(worst_p2, abs(approx.evaluate(b) - want))

        lin = rng.uniform(-1, 1, size=3)

        def p1(xs, ys, t=t, c=lin):
            return barycentric_coords(t, xs, ys) @ c

        approx = local_interpolate(p1, t, el.CR_ELEMENT)
        for _ in range(5):
            b = random_barycentric(rng)
            want = float((lin * b.as_array()).sum())
            worst_p1 = max(worst_p1, abs(approx.evaluate(b) - want))
    ok = worst_p2 <= 1e-9 and worst_p1 <= 1e-11
    return "polynomial reproduction", ok, f"quadratic {worst_p2:.1e}, linear {worst_p1:.1e}"


def check_lemma_identity(rng):
    worst = 0.0
    t = el.REFERENCE_TRIANGLE
    for functionals in (el.gn_functionals(2.0), el.pn_functionals(2.0)):
        N = el.build_N(functionals, t)
        for _ in range(10):
            a = rng.uniform(-1, 1, size=3)

            def p(xs, ys, t=t, a=a):
                lam = barycentric_coords(t, xs, ys)
                return sum(a[i - 1] * el.af3_vertex_poly(i, lam) for i in (1, 2, 3))

            vertex_vals = np.array([p(np.array([t.vertex(j).x]), np.array([t.vertex(j).y]))[0] for j in (1, 2, 3)])
            F_vals = np.array([el.apply_functional(F, p, t) for F in functionals])
            worst = max(worst, float(np.abs(N @ vertex_vals - F_vals).max()) / float(np.linalg.norm(a)))
    ok = worst <= 1e-10
    return "duality matrix identity on edge-mean-free quadratics", ok, f"max scaled residual {worst:.1e}"


def check_partition(rng):
    worst = 0.0
    for _ in range(200):
        b = random_barycentric(rng)
        lam = b.as_array()
        total = sum(el.af3_vertex_poly(i, lam) + el.af3_bubble_poly(i, lam) for i in (1, 2, 3))
        worst = max(worst, abs(float(total) - 1.0))
    ok = worst <= 1e-12
    return "vertex/bubble partition of unity", ok, f"max deviation {worst:.1e}"


ALL_CHECKS = (
    check_barycentric,
    check_beta,
    check_weighted_quadrature,
    check_triangle_rules,
    check_duality,
    check_closed_vs_generic,
    check_admissibility_boundary,
    check_polynomial_reproduction,
    check_lemma_identity,
    check_partition,
)


def run_all(seed: int = 20240901):
    results = []
    for fn in ALL_CHECKS:
        rng = np.random.default_rng(seed)
        results.append(fn(rng))
    return results

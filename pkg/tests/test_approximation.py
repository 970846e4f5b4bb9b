import numpy as np
import pytest

from crenrich.approximation import (
    convergence_order,
    global_interpolate,
    interpolation_property_check,
    l1_error,
    local_interpolate,
    serialize_field,
)
from crenrich.elements import CR_ELEMENT, make_element
from crenrich.errors import DomainError
from crenrich.geometry import barycentric_coords, structured_mesh
from crenrich.quadrature import triangle_rule

from conftest import random_bary, random_triangle


def quadratic(coeffs, t):
    def f(xs, ys):
        lam = barycentric_coords(t, xs, ys)
        return lam @ coeffs[:3] + lam**2 @ coeffs[3:]

    return f


def linear(coeffs, t):
    def f(xs, ys):
        return barycentric_coords(t, xs, ys) @ coeffs

    return f


class TestLocalInterpolate:
    @pytest.mark.parametrize("spec", ["cr", "af3", "gn:2", "pn:2"])
    def test_constant_reproduction(self, spec, rng):
        t = random_triangle(rng)
        approx = local_interpolate(lambda x, y: 3.25 + 0.0 * x, t, make_element(spec))
        for _ in range(20):
            assert approx.evaluate(random_bary(rng)) == pytest.approx(3.25, abs=1e-11)

    @pytest.mark.parametrize("spec", ["af3", "gn:2", "pn:2"])
    def test_quadratic_reproduction(self, spec, rng):
        elem = make_element(spec)
        for _ in range(10):
            t = random_triangle(rng)
            coeffs = rng.uniform(-1, 1, size=6)
            approx = local_interpolate(quadratic(coeffs, t), t, elem)
            for _ in range(5):
                b = random_bary(rng)
                lam = b.as_array()
                want = float(lam @ coeffs[:3] + lam**2 @ coeffs[3:])
                assert approx.evaluate(b) == pytest.approx(want, abs=1e-9)

    def test_cr_linear_exact_quadratic_not(self, rng):
        t = random_triangle(rng)
        coeffs = rng.uniform(-1, 1, size=3)
        approx = local_interpolate(linear(coeffs, t), t, CR_ELEMENT)
        worst = 0.0
        for _ in range(20):
            b = random_bary(rng)
            want = float(b.as_array() @ coeffs)
            worst = max(worst, abs(approx.evaluate(b) - want))
        assert worst <= 1e-11

        # lambda_1^2 is outside the linear range: the interpolant must miss it
        sq = local_interpolate(lambda x, y: barycentric_coords(t, x, y)[..., 0] ** 2, t, CR_ELEMENT)
        center = random_bary(rng)
        deviations = [abs(sq.evaluate(b) - b.l1**2) for b in (center, random_bary(rng), random_bary(rng))]
        assert max(deviations) > 1e-3

    def test_dof_layout(self, rng):
        t = random_triangle(rng)
        elem = make_element("gn:2")
        approx = local_interpolate(lambda x, y: np.exp(x), t, elem)
        assert approx.dofs.shape == (6,)
        assert local_interpolate(lambda x, y: np.exp(x), t, CR_ELEMENT).dofs.shape == (3,)


class TestInterpolationProperty:
    def test_exp_field_gn2(self, rng):
        t = random_triangle(rng, scale=1.0)
        res = interpolation_property_check(lambda x, y: np.exp(x + y), t, make_element("gn:2"))
        assert res.shape == (6,)
        assert res.max() <= 1e-9

    def test_quadratic_residuals_tiny(self, rng):
        t = random_triangle(rng)
        coeffs = rng.uniform(-1, 1, size=6)
        res = interpolation_property_check(quadratic(coeffs, t), t, make_element("pn:2"))
        assert res.max() <= 1e-11

    def test_cr_checks_three_edge_means(self, rng):
        t = random_triangle(rng, scale=1.0)
        res = interpolation_property_check(lambda x, y: np.exp(x + y), t, CR_ELEMENT)
        assert res.shape == (3,)
        assert res.max() <= 1e-9


class TestGlobalInterpolate:
    def test_quadratic_on_mesh(self, rng):
        mesh = structured_mesh(2)
        coeffs = rng.uniform(-1, 1, size=3)

        def f(xs, ys):
            return coeffs[0] + coeffs[1] * (xs**2 + ys) + coeffs[2] * xs * ys

        field = global_interpolate(mesh, f, make_element("gn:2"))
        pts = rng.uniform(0.02, 0.98, size=(200, 2))
        vals = field.evaluate_points(pts)
        want = f(pts[:, 0], pts[:, 1])
        assert np.abs(vals - want).max() <= 1e-9

    def test_constant_field(self):
        mesh = structured_mesh(2)
        field = global_interpolate(mesh, lambda x, y: 1.0, make_element("pn:2"))
        assert np.abs(field.dof_matrix[:, :3] - 1.0).max() <= 1e-13

    def test_shared_edge_means_agree(self, rng):
        # both triangles integrate the same f along the shared edge
        mesh = structured_mesh(1)
        f = lambda x, y: np.exp(x - 0.3 * y)
        field = global_interpolate(mesh, f, make_element("gn:2"))
        # shared diagonal: edge 1 of triangle 0 is (v2=(1,0) -> v3=(1,1))... locate by geometry
        t0, t1 = mesh.triangle(0), mesh.triangle(1)
        from crenrich.elements import apply_functional, edge_mean

        shared0 = [j for j in (1, 2, 3) if {(t0.vertex(j + 1).x, t0.vertex(j + 1).y), (t0.vertex(j + 2).x, t0.vertex(j + 2).y)} == {(0, 0), (1, 1)}]
        shared1 = [j for j in (1, 2, 3) if {(t1.vertex(j + 1).x, t1.vertex(j + 1).y), (t1.vertex(j + 2).x, t1.vertex(j + 2).y)} == {(0, 0), (1, 1)}]
        assert shared0 and shared1
        m0 = field.dof_matrix[0, shared0[0] - 1]
        m1 = field.dof_matrix[1, shared1[0] - 1]
        assert m0 == pytest.approx(m1, abs=1e-10)
        assert m0 == pytest.approx(apply_functional(edge_mean(shared0[0]), f, t0), abs=1e-12)

    def test_scalar_fallback_matches_vectorized(self):
        import math

        mesh = structured_mesh(2)
        elem = make_element("gn:2")
        vec = global_interpolate(mesh, lambda x, y: np.exp(x + y), elem)
        scal = global_interpolate(mesh, lambda x, y: math.exp(x + y), elem)
        assert np.abs(vec.dof_matrix - scal.dof_matrix).max() <= 1e-13

    def test_failure_carries_triangle_index(self):
        from crenrich.errors import InterpolationError

        mesh = structured_mesh(2)

        def bad(x, y):
            if np.any(np.asarray(x) > 0.75):
                raise RuntimeError("boom")
            return np.ones_like(np.asarray(x, dtype=float))

        with pytest.raises(InterpolationError) as exc:
            global_interpolate(mesh, bad, make_element("cr"))
        assert exc.value.triangle_index >= 0


class TestL1Error:
    def test_exact_for_quadratic(self, rng):
        mesh = structured_mesh(3)

        def f(xs, ys):
            return 1.0 + xs + ys**2 - 0.5 * xs * ys

        field = global_interpolate(mesh, f, make_element("gn:2"))
        rep = l1_error(field, f)
        assert rep.l1 <= 1e-10
        assert rep.n_triangles == 18
        assert rep.quadrature_degree == 8

    def test_cr_second_order(self):
        f = lambda x, y: np.exp(x + y)
        elem = make_element("cr")
        errs, hs = [], []
        for n in (4, 8):
            mesh = structured_mesh(n)
            errs.append(l1_error(global_interpolate(mesh, f, elem), f).l1)
            hs.append(mesh.h_max)
        slope = convergence_order(errs, hs).least_squares
        assert 1.7 <= slope <= 2.3

    def test_gn2_third_order(self):
        f = lambda x, y: np.exp(x + y)
        elem = make_element("gn:2")
        errs, hs = [], []
        for n in (4, 8):
            mesh = structured_mesh(n)
            errs.append(l1_error(global_interpolate(mesh, f, elem), f).l1)
            hs.append(mesh.h_max)
        slope = convergence_order(errs, hs).least_squares
        assert 2.6 <= slope <= 3.4

    def test_subdivide_close_to_plain(self):
        f = lambda x, y: np.cos(3 * x) * np.sin(2 * y)
        mesh = structured_mesh(4)
        field = global_interpolate(mesh, f, make_element("cr"))
        plain = l1_error(field, f, triangle_rule(8))
        fine = l1_error(field, f, triangle_rule(8), subdivide=True)
        assert fine.subdivided and not plain.subdivided
        assert fine.l1 == pytest.approx(plain.l1, rel=0.05)

    def test_deterministic(self):
        f = lambda x, y: np.exp(x) * np.cos(y)
        mesh = structured_mesh(4)
        elem = make_element("pn:2")
        a = l1_error(global_interpolate(mesh, f, elem), f)
        b = l1_error(global_interpolate(mesh, f, elem), f)
        assert a.l1 == b.l1 and a.linf_sampled == b.linf_sampled

    def test_monotone_refinement_f1(self):
        f = lambda x, y: np.exp(x + y)
        for spec in ("cr", "af3", "gn:2", "pn:2"):
            elem = make_element(spec)
            errs = [l1_error(global_interpolate(structured_mesh(n), f, elem), f).l1 for n in (4, 8, 16)]
            assert errs[0] > errs[1] > errs[2]


class TestConvergenceOrder:
    def test_slope_two(self):
        s = convergence_order((1.0, 0.25), (1.0, 0.5))
        assert s.pairwise == (2.0,)
        assert s.least_squares == pytest.approx(2.0, abs=1e-12)

    def test_slope_three(self):
        s = convergence_order((1.0, 0.125), (1.0, 0.5))
        assert s.pairwise[0] == pytest.approx(3.0, abs=1e-12)

    def test_constant_errors(self):
        s = convergence_order((0.5, 0.5, 0.5), (1.0, 0.5, 0.25))
        assert s.least_squares == pytest.approx(0.0, abs=1e-12)

    def test_zero_error_rejected(self):
        with pytest.raises(DomainError):
            convergence_order((1.0, 0.0), (1.0, 0.5))

    def test_bad_h(self):
        with pytest.raises(ValueError):
            convergence_order((1.0, 0.5), (0.5, 1.0))
        with pytest.raises(ValueError):
            convergence_order((1.0,), (1.0,))


class TestSerializeField:
    def test_dump_contains_rows(self):
        mesh = structured_mesh(1)
        field = global_interpolate(mesh, lambda x, y: x + y, make_element("gn:2"))
        text = serialize_field(field)
        lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
        assert len(lines) == 2
        first = lines[0].split()
        assert first[0] == "0"
        assert len(first) == 7  # index + 6 dofs
        assert float(first[1]) == pytest.approx(field.dof_matrix[0, 0])

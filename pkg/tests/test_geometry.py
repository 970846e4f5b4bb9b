import numpy as np
import pytest

from crenrich.errors import DegenerateTriangle, ParseError, PointOutsideMesh
from crenrich.geometry import (
    Barycentric,
    Point2,
    PointLocator,
    _barycentric_all,
    barycentric,
    barycentric_coords,
    locate,
    make_mesh,
    normalize_orientation,
    parse_mesh,
    serialize_mesh,
    special_points,
    structured_mesh,
)

from conftest import REFERENCE, random_triangle


class TestNormalizeOrientation:
    def test_ccw_unchanged(self):
        t = normalize_orientation(((0, 0), (1, 0), (0, 1)))
        assert (t.v1.x, t.v1.y, t.v2.x, t.v2.y, t.v3.x, t.v3.y) == (0, 0, 1, 0, 0, 1)
        assert t.signed_area == pytest.approx(0.5, abs=1e-15)

    def test_cw_swapped(self):
        t = normalize_orientation(((0, 0), (0, 1), (1, 0)))
        assert (t.v2.x, t.v2.y) == (1, 0)
        assert (t.v3.x, t.v3.y) == (0, 1)
        assert t.signed_area == pytest.approx(0.5, abs=1e-15)

    def test_collinear_rejected(self):
        with pytest.raises(DegenerateTriangle):
            normalize_orientation(((0, 0), (1, 1), (2, 2)))

    def test_near_degenerate_rejected(self):
        with pytest.raises(DegenerateTriangle):
            normalize_orientation(((0, 0), (1, 0), (0.5, 1e-17)))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            normalize_orientation(((0, 0), (1, float("nan")), (0, 1)))


class TestBarycentric:
    def test_vertex(self):
        lam = barycentric(REFERENCE, REFERENCE.v1)
        assert (lam.l1, lam.l2, lam.l3) == (1.0, 0.0, 0.0)

    def test_midpoint_of_opposite_edge(self):
        # midpoint m_1 lies on the edge not containing v_1
        m1 = REFERENCE.midpoint(1)
        lam = barycentric(REFERENCE, m1)
        assert lam.l1 == pytest.approx(0.0, abs=1e-15)
        assert lam.l2 == pytest.approx(0.5, abs=1e-15)
        assert lam.l3 == pytest.approx(0.5, abs=1e-15)

    def test_barycenter(self, rng):
        t = random_triangle(rng)
        lam = barycentric(t, t.barycenter)
        for v in (lam.l1, lam.l2, lam.l3):
            assert v == pytest.approx(1.0 / 3.0, abs=1e-13)

    def test_sum_and_reproduction_property(self, rng):
        for _ in range(1000):
            t = random_triangle(rng)
            p = rng.uniform(-2.0, 2.0, size=2)
            lam = barycentric(t, p)
            assert abs(lam.l1 + lam.l2 + lam.l3 - 1.0) <= 1e-12
            rec = lam.l1 * t.v1.as_array() + lam.l2 * t.v2.as_array() + lam.l3 * t.v3.as_array()
            assert np.abs(rec - p).max() <= 1e-10 * t.diameter

    def test_affine_covariance(self, rng):
        for _ in range(200):
            t = random_triangle(rng)
            x = rng.uniform(-1, 1, size=2)
            y = rng.uniform(-1, 1, size=2)
            s = rng.uniform()
            mixed = barycentric(t, s * x + (1 - s) * y).as_array()
            direct = s * barycentric(t, x).as_array() + (1 - s) * barycentric(t, y).as_array()
            assert np.abs(mixed - direct).max() <= 1e-12

    def test_vectorized_matches_scalar(self, rng):
        t = random_triangle(rng)
        xs = rng.uniform(-1, 1, size=17)
        ys = rng.uniform(-1, 1, size=17)
        lams = barycentric_coords(t, xs, ys)
        assert lams.shape == (17, 3)
        for k in range(17):
            assert np.abs(lams[k] - barycentric(t, (xs[k], ys[k])).as_array()).max() <= 1e-13

    def test_weight_sum_validated(self):
        with pytest.raises(ValueError):
            Barycentric(0.5, 0.5, 0.5)


class TestSpecialPoints:
    def test_reference_midpoints_and_barycenter(self):
        m1, m2, m3, mstar = special_points(REFERENCE)
        assert (m1.x, m1.y) == (0.5, 0.5)
        assert (m2.x, m2.y) == (0.0, 0.5)
        assert (m3.x, m3.y) == (0.5, 0.0)
        assert mstar.x == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert mstar.y == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_wraparound(self):
        assert REFERENCE.midpoint(4) == REFERENCE.midpoint(1)
        assert REFERENCE.midpoint(5) == REFERENCE.midpoint(2)
        assert REFERENCE.vertex(4) == REFERENCE.vertex(1)
        assert REFERENCE.vertex(5) == REFERENCE.vertex(2)


NODE_1TRI = """\
3 2 0 0
0 0.0 0.0
1 1.0 0.0
2 0.0 1.0
"""

ELE_1TRI = """\
1 3 0
0 0 1 2
"""


class TestParseMesh:
    def test_single_triangle(self):
        mesh = parse_mesh(NODE_1TRI, ELE_1TRI)
        assert mesh.n_vertices == 3
        assert mesh.n_triangles == 1
        assert mesh.areas[0] == pytest.approx(0.5, abs=1e-15)

    def test_one_based_detected(self):
        node = "3 2 0 0\n1 0.0 0.0\n2 1.0 0.0\n3 0.0 1.0\n"
        ele = "1 3 0\n1 1 2 3\n"
        mesh = parse_mesh(node, ele)
        assert mesh.triangles.tolist() == [[0, 1, 2]]

    def test_comments_ignored(self):
        mesh = parse_mesh("# header comment\n" + NODE_1TRI, ELE_1TRI + "# trailing\n")
        assert mesh.n_triangles == 1

    def test_out_of_range_vertex(self):
        ele = "1 3 0\n0 0 1 99\n"
        with pytest.raises(IndexError):
            parse_mesh(NODE_1TRI, ele)

    def test_malformed_header(self):
        with pytest.raises(ParseError):
            parse_mesh("3 2\n", ELE_1TRI)

    def test_row_count_mismatch(self):
        node = "4 2 0 0\n0 0.0 0.0\n1 1.0 0.0\n2 0.0 1.0\n"
        with pytest.raises(ParseError):
            parse_mesh(node, ELE_1TRI)

    def test_degenerate_triangle(self):
        node = "3 2 0 0\n0 0.0 0.0\n1 1.0 1.0\n2 2.0 2.0\n"
        with pytest.raises(DegenerateTriangle):
            parse_mesh(node, ELE_1TRI)

    def test_cw_input_normalized(self):
        ele = "1 3 0\n0 0 2 1\n"  # clockwise ordering
        mesh = parse_mesh(NODE_1TRI, ele)
        assert mesh.areas[0] > 0

    def test_duplicate_triangle(self):
        node = "3 2 0 0\n0 0.0 0.0\n1 1.0 0.0\n2 0.0 1.0\n"
        ele = "2 3 0\n0 0 1 2\n1 2 0 1\n"
        with pytest.raises(ParseError):
            parse_mesh(node, ele)

    def test_markers_parsed(self):
        node = "3 2 0 1\n0 0.0 0.0 1\n1 1.0 0.0 1\n2 0.0 1.0 0\n"
        mesh = parse_mesh(node, ELE_1TRI)
        assert mesh.boundary_markers.tolist() == [1, 1, 0]

    def test_roundtrip_exact(self, rng):
        mesh = structured_mesh(3)
        node, ele = serialize_mesh(mesh)
        again = parse_mesh(node, ele)
        assert np.array_equal(again.vertices, mesh.vertices)
        assert np.array_equal(again.triangles, mesh.triangles)

    def test_roundtrip_random_coords(self, rng):
        verts = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], dtype=float)
        verts[:, 0] += rng.uniform(-1e-3, 1e-3, size=4)  # irrational-looking floats
        mesh = make_mesh(verts, [[0, 1, 2], [1, 3, 2]])
        node, ele = serialize_mesh(mesh)
        again = parse_mesh(node, ele)
        assert np.array_equal(again.vertices, mesh.vertices)
        assert np.array_equal(again.triangles, mesh.triangles)


class TestStructuredMesh:
    def test_n1(self):
        mesh = structured_mesh(1)
        assert mesh.n_triangles == 2
        assert mesh.areas.sum() == pytest.approx(1.0, abs=1e-15)

    def test_n4_count(self):
        assert structured_mesh(4).n_triangles == 32

    def test_uniform_areas(self):
        for n in (1, 2, 5):
            mesh = structured_mesh(n)
            assert np.abs(mesh.areas - 1.0 / (2 * n * n)).max() <= 1e-15

    @pytest.mark.parametrize("n", [1, 3, 8, 64])
    def test_total_area(self, n):
        assert abs(structured_mesh(n).areas.sum() - 1.0) <= 1e-13

    def test_h_max(self):
        assert structured_mesh(4).h_max == pytest.approx(np.sqrt(2) / 4, abs=1e-15)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            structured_mesh(0)


class TestLocate:
    def test_lower_triangle(self):
        mesh = structured_mesh(1)
        i, lam = locate(mesh, (0.25, 0.2))
        assert i == 0
        assert lam.is_inside

    def test_diagonal_point_lands_in_lower_triangle(self):
        i, _ = locate(structured_mesh(1), (0.25, 0.25))
        assert i == 0

    def test_shared_edge_lowest_index(self):
        mesh = structured_mesh(1)
        i, _ = locate(mesh, (0.5, 0.5))  # on the diagonal shared by both
        assert i == 0

    def test_outside(self):
        with pytest.raises(PointOutsideMesh):
            locate(structured_mesh(1), (2.0, 2.0))

    def test_reconstruction(self, rng):
        mesh = structured_mesh(4)
        for _ in range(100):
            p = rng.uniform(0, 1, size=2)
            i, lam = locate(mesh, p)
            verts = mesh.triangle_vertices()[i]
            rec = lam.as_array() @ verts
            assert np.abs(rec - p).max() <= 1e-12

    def test_grid_path_matches_bruteforce(self, rng):
        mesh = structured_mesh(72)  # 10368 triangles: grid index kicks in
        loc = PointLocator(mesh)
        assert loc._grid is not None
        for _ in range(50):
            p = rng.uniform(0, 1, size=2)
            i, lam = loc.locate(p)
            lam_all = _barycentric_all(mesh, p[0], p[1])
            inside = (lam_all >= -1e-12).all(axis=1)
            assert inside[i]
            assert i == int(np.argmax(inside))  # lowest containing index


class TestImmutability:
    def test_mesh_arrays_readonly(self):
        mesh = structured_mesh(2)
        with pytest.raises(ValueError):
            mesh.vertices[0, 0] = 99.0
        with pytest.raises(ValueError):
            mesh.triangles[0, 0] = 99

    def test_point_frozen(self):
        p = Point2(0.0, 1.0)
        with pytest.raises(AttributeError):
            p.x = 2.0

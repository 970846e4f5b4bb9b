"""Triangles, barycentric coordinates, and triangular meshes.

Vertices of every triangle are kept in counterclockwise order (positive
signed area); orientation is repaired silently on construction because
mesh files frequently ship clockwise elements.
"""
from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DegenerateTriangle, ParseError, PointOutsideMesh

#: containment tolerance for barycentric weights
INSIDE_TOL = 1e-12

#: relative signed-area threshold below which a triangle counts as degenerate
DEGENERACY_FACTOR = 1e-14

#: triangle count above which point location switches to a bucket grid
LOCATE_GRID_THRESHOLD = 10_000


@dataclass(frozen=True)
class Point2:
    """A point in the plane; coordinates must be finite."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Barycentric:
    """Affine weights of a point relative to a triangle's vertices."""

    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        s = self.l1 + self.l2 + self.l3
        if not math.isfinite(s) or abs(s - 1.0) > 1e-9:
            raise ValueError(f"barycentric weights sum to {s}, expected 1")

    def get(self, i: int) -> float:
        """Weight of vertex i with cyclic wraparound (i in 1..5)."""
        return (self.l1, self.l2, self.l3)[cyclic(i) - 1]

    def as_array(self) -> np.ndarray:
        return np.array([self.l1, self.l2, self.l3])

    @property
    def is_inside(self) -> bool:
        return min(self.l1, self.l2, self.l3) >= -INSIDE_TOL


def cyclic(j: int) -> int:
    """Map an index to {1, 2, 3} cyclically (4 -> 1, 5 -> 2)."""
    return (j - 1) % 3 + 1


def _as_point(p) -> Point2:
    if isinstance(p, Point2):
        return p
    x, y = p
    return Point2(float(x), float(y))


@dataclass(frozen=True)
class Triangle:
    """Counterclockwise triangle with its signed area cached.

    Build instances through :func:`normalize_orientation`, which repairs
    orientation and rejects degenerate vertex sets.
    """

    v1: Point2
    v2: Point2
    v3: Point2
    signed_area: float

    def vertex(self, j: int) -> Point2:
        """Vertex j with cyclic wraparound (j in 1..5)."""
        return (self.v1, self.v2, self.v3)[cyclic(j) - 1]

    def midpoint(self, j: int) -> Point2:
        """Midpoint of the edge opposite vertex j (cyclic wraparound)."""
        a = self.vertex(j + 1)
        b = self.vertex(j + 2)
        return Point2(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))

    @property
    def barycenter(self) -> Point2:
        return Point2(
            (self.v1.x + self.v2.x + self.v3.x) / 3.0,
            (self.v1.y + self.v2.y + self.v3.y) / 3.0,
        )

    @property
    def diameter(self) -> float:
        """Length of the longest edge."""
        pts = self.vertices_array()
        edges = pts[[1, 2, 0]] - pts
        return float(np.sqrt((edges**2).sum(axis=1)).max())

    def vertices_array(self) -> np.ndarray:
        return np.array([[self.v1.x, self.v1.y], [self.v2.x, self.v2.y], [self.v3.x, self.v3.y]])


def _signed_area(a: Point2, b: Point2, c: Point2) -> float:
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))


def normalize_orientation(vertices: Sequence) -> Triangle:
    """Build a CCW triangle from three raw points, swapping v2/v3 if needed.

    Raises DegenerateTriangle when the signed area is below the
    scale-invariant threshold DEGENERACY_FACTOR * (bbox diagonal)^2.
    """
    if isinstance(vertices, Triangle):
        vertices = (vertices.v1, vertices.v2, vertices.v3)
    a, b, c = (_as_point(p) for p in vertices)
    area = _signed_area(a, b, c)
    xs = (a.x, b.x, c.x)
    ys = (a.y, b.y, c.y)
    diag_sq = (max(xs) - min(xs)) ** 2 + (max(ys) - min(ys)) ** 2
    if abs(area) <= DEGENERACY_FACTOR * diag_sq:
        raise DegenerateTriangle(f"triangle {a}, {b}, {c} has signed area {area}")
    if area < 0.0:
        b, c = c, b
        area = -area
    return Triangle(a, b, c, area)


def barycentric(t: Triangle, p) -> Barycentric:
    """Barycentric coordinates of p via signed-area ratios (Cramer's rule)."""
    p = _as_point(p)
    e1x, e1y = t.v2.x - t.v1.x, t.v2.y - t.v1.y
    e2x, e2y = t.v3.x - t.v1.x, t.v3.y - t.v1.y
    dx, dy = p.x - t.v1.x, p.y - t.v1.y
    den = e1x * e2y - e1y * e2x
    l2 = (dx * e2y - dy * e2x) / den
    l3 = (e1x * dy - e1y * dx) / den
    return Barycentric(1.0 - l2 - l3, l2, l3)


def barycentric_coords(t: Triangle, xs, ys) -> np.ndarray:
    """Vectorized barycentric coordinates; returns shape xs.shape + (3,)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    e1x, e1y = t.v2.x - t.v1.x, t.v2.y - t.v1.y
    e2x, e2y = t.v3.x - t.v1.x, t.v3.y - t.v1.y
    den = e1x * e2y - e1y * e2x
    dx, dy = xs - t.v1.x, ys - t.v1.y
    l2 = (dx * e2y - dy * e2x) / den
    l3 = (e1x * dy - e1y * dx) / den
    return np.stack([1.0 - l2 - l3, l2, l3], axis=-1)


def special_points(t: Triangle) -> tuple[Point2, Point2, Point2, Point2]:
    """Edge midpoints (m1, m2, m3) and the barycenter."""
    return t.midpoint(1), t.midpoint(2), t.midpoint(3), t.barycenter


def min_angle_degrees(t: Triangle) -> float:
    """Smallest interior angle, a standard shape-quality measure."""
    pts = t.vertices_array()
    sides = np.sqrt(((pts[[1, 2, 0]] - pts[[2, 0, 1]]) ** 2).sum(axis=1))
    a, b, c = sides
    cosines = np.array(
        [
            (b * b + c * c - a * a) / (2.0 * b * c),
            (a * a + c * c - b * b) / (2.0 * a * c),
            (a * a + b * b - c * c) / (2.0 * a * b),
        ]
    )
    return float(np.degrees(np.arccos(np.clip(cosines, -1.0, 1.0))).min())


@dataclass(frozen=True, eq=False)
class Mesh:
    """Indexed triangulation: vertex coordinates plus vertex-index triples.

    All triangles are CCW and nondegenerate after construction; arrays are
    read-only, so instances can be shared freely across threads.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_markers: np.ndarray | None = None

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def triangle(self, i: int) -> Triangle:
        a, b, c = (Point2(*self.vertices[k]) for k in self.triangles[i])
        return Triangle(a, b, c, float(self.areas[i]))

    def triangle_vertices(self) -> np.ndarray:
        """Vertex coordinates per triangle, shape (n_triangles, 3, 2)."""
        return self.vertices[self.triangles]

    @cached_property
    def areas(self) -> np.ndarray:
        v = self.triangle_vertices()
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def h_max(self) -> float:
        """Longest edge length over the mesh."""
        v = self.triangle_vertices()
        lengths = [np.linalg.norm(v[:, (k + 1) % 3] - v[:, k], axis=1) for k in range(3)]
        return float(np.max(lengths))

    @cached_property
    def bounds(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) of the vertex set."""
        return (
            float(self.vertices[:, 0].min()),
            float(self.vertices[:, 0].max()),
            float(self.vertices[:, 1].min()),
            float(self.vertices[:, 1].max()),
        )


def make_mesh(vertices, triangles, boundary_markers=None) -> Mesh:
    """Validate and normalize raw mesh arrays into a Mesh.

    Triangles with negative signed area get their last two indices
    swapped; degenerate or duplicate triangles are rejected.
    """
    verts = np.ascontiguousarray(vertices, dtype=float)
    tris = np.ascontiguousarray(triangles, dtype=np.int64)
    if verts.ndim != 2 or verts.shape[1] != 2:
        raise ParseError(f"vertex array must be (n, 2), got {verts.shape}")
    if tris.ndim != 2 or tris.shape[1] != 3:
        raise ParseError(f"triangle array must be (m, 3), got {tris.shape}")
    if not np.isfinite(verts).all():
        raise ParseError("non-finite vertex coordinate")
    if tris.size and (tris.min() < 0 or tris.max() >= verts.shape[0]):
        bad = int(tris.max() if tris.max() >= verts.shape[0] else tris.min())
        raise IndexError(f"vertex index {bad} out of range for {verts.shape[0]} vertices")

    v = verts[tris]
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    area2 = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    xmin, ymin = verts.min(axis=0) if len(verts) else (0.0, 0.0)
    xmax, ymax = verts.max(axis=0) if len(verts) else (0.0, 0.0)
    diag_sq = (xmax - xmin) ** 2 + (ymax - ymin) ** 2
    degenerate = np.abs(0.5 * area2) <= DEGENERACY_FACTOR * diag_sq
    if degenerate.any():
        i = int(np.argmax(degenerate))
        raise DegenerateTriangle(f"triangle {i} {tris[i].tolist()} is degenerate")
    flip = area2 < 0.0
    if flip.any():
        tris = tris.copy()
        tris[flip, 1], tris[flip, 2] = tris[flip, 2].copy(), tris[flip, 1].copy()

    seen = set()
    for i, tri in enumerate(tris):
        key = tuple(sorted(tri.tolist()))
        if key in seen:
            raise ParseError(f"duplicate triangle {tris[i].tolist()} at row {i}")
        seen.add(key)

    markers = None
    if boundary_markers is not None:
        markers = np.ascontiguousarray(boundary_markers, dtype=np.int64)
        if markers.shape != (verts.shape[0],):
            raise ParseError("boundary markers must be one integer per vertex")
        markers.setflags(write=False)
    verts.setflags(write=False)
    tris.setflags(write=False)
    return Mesh(verts, tris, markers)


def _data_lines(text: str) -> list[list[str]]:
    rows = []
    for line in text.splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            rows.append(body.split())
    return rows


def parse_mesh(node_text: str, ele_text: str) -> Mesh:
    """Parse Shewchuk Triangle .node/.ele file contents into a Mesh.

    The index base (0 or 1) is auto-detected from the first vertex index;
    internal indices are always 0-based. '#' starts a comment.
    """
    nrows = _data_lines(node_text)
    if not nrows:
        raise ParseError("empty .node file")
    header = nrows[0]
    if len(header) < 4:
        raise ParseError(f".node header needs 4 fields, got {header}")
    try:
        n_vert, dim, n_attrs, n_markers = (int(x) for x in header[:4])
    except ValueError as e:
        raise ParseError(f"bad .node header {header}: {e}") from None
    if dim != 2:
        raise ParseError(f"only 2-D .node files supported, got dim={dim}")
    if len(nrows) - 1 != n_vert:
        raise ParseError(f".node declares {n_vert} vertices, found {len(nrows) - 1} rows")

    base = None
    verts = np.empty((n_vert, 2))
    markers = np.zeros(n_vert, dtype=np.int64) if n_markers > 0 else None
    expected = 1 + 2 + n_attrs + n_markers
    for row in nrows[1:]:
        if len(row) != expected:
            raise ParseError(f".node row has {len(row)} fields, expected {expected}: {row}")
        try:
            idx = int(row[0])
            x, y = float(row[1]), float(row[2])
        except ValueError as e:
            raise ParseError(f"bad .node row {row}: {e}") from None
        if base is None:
            if idx not in (0, 1):
                raise ParseError(f"first vertex index must be 0 or 1, got {idx}")
            base = idx
        k = idx - base
        if not 0 <= k < n_vert:
            raise IndexError(f"vertex index {idx} out of range")
        verts[k] = (x, y)
        if markers is not None:
            markers[k] = int(row[3 + n_attrs])

    erows = _data_lines(ele_text)
    if not erows:
        raise ParseError("empty .ele file")
    eheader = erows[0]
    if len(eheader) < 3:
        raise ParseError(f".ele header needs 3 fields, got {eheader}")
    try:
        n_tri, nodes_per, _ = (int(x) for x in eheader[:3])
    except ValueError as e:
        raise ParseError(f"bad .ele header {eheader}: {e}") from None
    if nodes_per != 3:
        raise ParseError(f"only 3-node triangles supported, got {nodes_per}")
    if len(erows) - 1 != n_tri:
        raise ParseError(f".ele declares {n_tri} triangles, found {len(erows) - 1} rows")

    tris = np.empty((n_tri, 3), dtype=np.int64)
    for r, row in enumerate(erows[1:]):
        if len(row) < 4:
            raise ParseError(f".ele row has {len(row)} fields, expected >= 4: {row}")
        try:
            ids = [int(x) for x in row[1:4]]
        except ValueError as e:
            raise ParseError(f"bad .ele row {row}: {e}") from None
        for i in ids:
            if not 0 <= i - base < n_vert:
                raise IndexError(f"vertex index {i} out of range in .ele row {r}")
        tris[r] = [i - base for i in ids]

    return make_mesh(verts, tris, markers)


def serialize_mesh(mesh: Mesh) -> tuple[str, str]:
    """Render a Mesh back to .node/.ele texts (0-based, exact round trip)."""
    n_markers = 0 if mesh.boundary_markers is None else 1
    lines = [f"{mesh.n_vertices} 2 0 {n_markers}"]
    for i, (x, y) in enumerate(mesh.vertices):
        row = f"{i} {float(x)!r} {float(y)!r}"
        if n_markers:
            row += f" {int(mesh.boundary_markers[i])}"
        lines.append(row)
    node_text = "\n".join(lines) + "\n"

    lines = [f"{mesh.n_triangles} 3 0"]
    for i, (a, b, c) in enumerate(mesh.triangles):
        lines.append(f"{i} {a} {b} {c}")
    ele_text = "\n".join(lines) + "\n"
    return node_text, ele_text


def structured_mesh(n: int) -> Mesh:
    """Uniform n x n grid on [0,1]^2, each cell split along its SW-NE diagonal."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    side = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(side, side)
    verts = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(ix, iy):
        return iy * (n + 1) + ix

    tris = []
    for iy in range(n):
        for ix in range(n):
            a = vid(ix, iy)
            b = vid(ix + 1, iy)
            c = vid(ix + 1, iy + 1)
            d = vid(ix, iy + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    return make_mesh(verts, np.array(tris, dtype=np.int64))


def _barycentric_all(mesh: Mesh, x: float, y: float) -> np.ndarray:
    v = mesh.triangle_vertices()
    e1 = v[:, 1] - v[:, 0]
    e2 = v[:, 2] - v[:, 0]
    den = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    dx = x - v[:, 0, 0]
    dy = y - v[:, 0, 1]
    l2 = (dx * e2[:, 1] - dy * e2[:, 0]) / den
    l3 = (e1[:, 0] * dy - e1[:, 1] * dx) / den
    return np.column_stack([1.0 - l2 - l3, l2, l3])


class PointLocator:
    """Reusable point-in-mesh queries; ties resolve to the lowest index.

    Brute-force scan below LOCATE_GRID_THRESHOLD triangles, uniform bucket
    grid above it.
    """

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self._grid = None
        if mesh.n_triangles >= LOCATE_GRID_THRESHOLD:
            self._build_grid()

    def _build_grid(self):
        mesh = self.mesh
        xmin, xmax, ymin, ymax = mesh.bounds
        ncell = max(1, int(math.sqrt(mesh.n_triangles)))
        sx = (xmax - xmin) / ncell or 1.0
        sy = (ymax - ymin) / ncell or 1.0
        cells: dict[tuple[int, int], list[int]] = {}
        v = mesh.triangle_vertices()
        lo = v.min(axis=1)
        hi = v.max(axis=1)
        for i in range(mesh.n_triangles):
            cx0 = min(max(int((lo[i, 0] - xmin) / sx), 0), ncell - 1)
            cx1 = min(max(int((hi[i, 0] - xmin) / sx), 0), ncell - 1)
            cy0 = min(max(int((lo[i, 1] - ymin) / sy), 0), ncell - 1)
            cy1 = min(max(int((hi[i, 1] - ymin) / sy), 0), ncell - 1)
            for cx in range(cx0, cx1 + 1):
                for cy in range(cy0, cy1 + 1):
                    cells.setdefault((cx, cy), []).append(i)
        self._grid = (cells, xmin, ymin, sx, sy, ncell)

    def locate(self, p) -> tuple[int, Barycentric]:
        p = _as_point(p)
        mesh = self.mesh
        xmin, xmax, ymin, ymax = mesh.bounds
        pad = INSIDE_TOL * (1.0 + max(xmax - xmin, ymax - ymin))
        if not (xmin - pad <= p.x <= xmax + pad and ymin - pad <= p.y <= ymax + pad):
            raise PointOutsideMesh(f"({p.x}, {p.y}) outside mesh bounding box")
        if self._grid is None:
            lam = _barycentric_all(mesh, p.x, p.y)
            ok = (lam >= -INSIDE_TOL).all(axis=1)
            if not ok.any():
                raise PointOutsideMesh(f"({p.x}, {p.y}) not in any triangle")
            i = int(np.argmax(ok))
            return i, Barycentric(*lam[i])
        cells, gx, gy, sx, sy, ncell = self._grid
        cx = min(max(int((p.x - gx) / sx), 0), ncell - 1)
        cy = min(max(int((p.y - gy) / sy), 0), ncell - 1)
        for i in cells.get((cx, cy), ()):  # insertion order is ascending
            lam = barycentric(mesh.triangle(i), p)
            if lam.is_inside:
                return i, lam
        raise PointOutsideMesh(f"({p.x}, {p.y}) not in any triangle")


_locators: "weakref.WeakKeyDictionary[Mesh, PointLocator]" = weakref.WeakKeyDictionary()


def locate(mesh: Mesh, p) -> tuple[int, Barycentric]:
    """Find a triangle containing p (lowest index wins on shared edges)."""
    loc = _locators.get(mesh)
    if loc is None:
        loc = PointLocator(mesh)
        _locators[mesh] = loc
    return loc.locate(p)

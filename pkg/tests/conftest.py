import numpy as np
import pytest

from crenrich.geometry import Barycentric, min_angle_degrees, normalize_orientation

REFERENCE = normalize_orientation(((0.0, 0.0), (1.0, 0.0), (0.0, 1.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_triangle(rng, scale=2.0, min_angle=20.0):
    """Random CCW triangle, resampled until no angle is below min_angle.

    Mirrors the shape quality of the Delaunay meshes the convergence
    experiments target; the barycentric solve is only guaranteed stable
    away from slivers.
    """
    while True:
        pts = rng.uniform(-scale, scale, size=(3, 2))
        try:
            t = normalize_orientation(pts)
        except Exception:
            continue
        if min_angle_degrees(t) >= min_angle:
            return t


def random_bary(rng) -> Barycentric:
    a, b = sorted(rng.uniform(0.0, 1.0, size=2))
    return Barycentric(a, b - a, 1.0 - b)

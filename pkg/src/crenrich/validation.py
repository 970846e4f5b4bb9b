"""Input-validation helpers shared by the numerical core and the estimator."""
from __future__ import annotations

import numpy as np


def check_points(X) -> np.ndarray:
    """Coerce X to a finite (n, 2) float array of planar points."""
    pts = np.asarray(X, dtype=float)
    if pts.ndim == 1 and pts.shape == (2,):
        pts = pts[None, :]
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected points of shape (n, 2), got {pts.shape}")
    if not np.isfinite(pts).all():
        raise ValueError("points contain NaN or Inf")
    return pts


def as_field(f):
    """Wrap a scalar field f(x, y) so it evaluates elementwise on arrays.

    Vectorized callables are used directly; scalar-only callables fall back
    to numpy.vectorize, and constants broadcast.
    """

    def call(xs, ys):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        try:
            out = np.asarray(f(xs, ys), dtype=float)
        except Exception:
            out = None
        if out is not None:
            if out.shape == xs.shape:
                return out
            if out.ndim == 0:
                return np.full(xs.shape, float(out))
        return np.vectorize(f, otypes=[float])(xs, ys)

    return call

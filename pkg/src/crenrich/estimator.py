"""scikit-learn style facade over the mesh interpolation pipeline."""
from __future__ import annotations

from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .approximation import ErrorReport, global_interpolate, l1_error
from .elements import make_element
from .geometry import Mesh, structured_mesh
from .quadrature import RuleSet, triangle_rule
from .validation import check_points


class TriangleMeshInterpolator(RegressorMixin, BaseEstimator):
    """Nonconforming piecewise-polynomial interpolation on a triangle mesh.

    Unlike a typical regressor, ``fit`` consumes a callable field rather
    than samples: the degrees of freedom are line integrals of the target,
    so the function itself is required. ``predict`` then evaluates the
    fitted piecewise polynomial at arbitrary points of the meshed domain.

    Parameters
    ----------
    element : str, default "gn:2"
        Element spec: "cr", "af3", "gn:<gamma>" or "pn:<mu>".
    mesh : Mesh or None, default None
        Triangulation to interpolate on; when None, a structured mesh of
        the unit square with ``structured_n`` cells per side is used.
    structured_n : int, default 8
        Cells per side of the fallback structured mesh.
    quad_order : int, default 20
        Point count of the 1-D rules evaluating the degree-of-freedom
        functionals.

    Examples
    --------
    >>> interp = TriangleMeshInterpolator(element="gn:2", structured_n=4)
    >>> interp.fit(lambda x, y: x**2 + y)
    TriangleMeshInterpolator(structured_n=4)
    >>> round(float(interp.predict([[0.3, 0.4]])[0]), 9)
    0.49
    """

    def __init__(self, element: str = "gn:2", mesh: Mesh | None = None, structured_n: int = 8, quad_order: int = 20):
        self.element = element
        self.mesh = mesh
        self.structured_n = structured_n
        self.quad_order = quad_order

    def fit(self, f, y=None):
        """Interpolate the callable field f(x, y) on the mesh."""
        if not callable(f):
            raise TypeError("fit expects a callable field f(x, y)")
        mesh = self.mesh if self.mesh is not None else structured_mesh(self.structured_n)
        element = make_element(self.element)
        rules = RuleSet(order=self.quad_order)
        self.mesh_ = mesh
        self.element_ = element
        self.target_ = f
        self.field_ = global_interpolate(mesh, f, element, rules)
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        """Evaluate the fitted field at points X of shape (n, 2)."""
        check_is_fitted(self, "field_")
        return self.field_.evaluate_points(check_points(X))

    def interpolation_error(self, f=None, degree: int = 8, subdivide: bool = False) -> ErrorReport:
        """L1 error of the fitted field against f (default: the fitted target)."""
        check_is_fitted(self, "field_")
        target = self.target_ if f is None else f
        return l1_error(self.field_, target, triangle_rule(degree), subdivide)

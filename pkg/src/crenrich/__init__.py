"""Quadratic enrichments of the nonconforming Crouzeix-Raviart triangular
element: dual bases, interpolation operators, and convergence experiments.
"""

from .errors import (
    ConfigError,
    CrenrichError,
    DegenerateTriangle,
    DomainError,
    InadmissibleFunctionals,
    InterpolationError,
    ParseError,
    PointOutsideMesh,
    UnknownFunction,
    UnsupportedDegree,
)
from .geometry import (
    Barycentric,
    Mesh,
    Point2,
    PointLocator,
    Triangle,
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
from .quadrature import (
    DEFAULT_RULES,
    RuleSet,
    SegmentRule,
    TriangleRule,
    beta,
    gauss_jacobi_01,
    gauss_legendre_01,
    sigma,
    subdivide_rule,
    triangle_rule,
)
from .elements import (
    CR_ELEMENT,
    BasisEval,
    CRElement,
    DofFunctional,
    EnrichedElement,
    admissibility,
    af3_basis,
    af3_element,
    apply_functional,
    build_N,
    cr_basis,
    edge_mean,
    family_constants,
    general_enriched_basis,
    gn_basis,
    gn_element,
    gn_functionals,
    make_element,
    median_weighted,
    midsegment_weighted,
    parse_functional,
    pn_basis,
    pn_element,
    pn_functionals,
    vertex_eval,
    vertex_functionals,
)
from .approximation import (
    ErrorReport,
    LocalApproximant,
    PiecewiseField,
    Slopes,
    convergence_order,
    global_interpolate,
    interpolation_property_check,
    l1_error,
    local_interpolate,
    serialize_field,
)
from .harness import (
    ConvergenceReport,
    ReportRow,
    RunConfig,
    TestFunction,
    emit_csv,
    emit_plot_script,
    run_convergence,
    test_function,
)
from .estimator import TriangleMeshInterpolator

__version__ = "0.1.0"

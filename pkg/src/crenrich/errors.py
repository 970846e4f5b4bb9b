"""Exception types shared across the package."""


class CrenrichError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateTriangle(CrenrichError, ValueError):
    """Triangle with (near-)zero signed area."""


class ParseError(CrenrichError, ValueError):
    """Malformed mesh file or mesh data."""


class PointOutsideMesh(CrenrichError, LookupError):
    """Point not contained in any triangle of the mesh."""


class DomainError(CrenrichError, ValueError):
    """Parameter outside its mathematically admissible range."""


class InadmissibleFunctionals(DomainError):
    """Degree-of-freedom triple whose dual matrix is (numerically) singular."""


class UnsupportedDegree(CrenrichError, ValueError):
    """No tabulated triangle quadrature rule for the requested degree."""


class UnknownFunction(CrenrichError, KeyError):
    """Requested test function is not registered."""


class ConfigError(CrenrichError, ValueError):
    """Invalid experiment configuration."""


class InterpolationError(CrenrichError, RuntimeError):
    """Failure while interpolating on a mesh; carries the triangle index."""

    def __init__(self, triangle_index: int, message: str):
        super().__init__(f"triangle {triangle_index}: {message}")
        self.triangle_index = triangle_index

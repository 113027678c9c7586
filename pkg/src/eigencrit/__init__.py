"""Critical points and nodal lines of low Dirichlet eigenfunctions on long
convex planar domains."""

__version__ = "0.1.0"

from .geometry import (DomainError, DomainSpec, NormalizedDomain, make_family,  # noqa: E402
                       normalize_domain)
from .discretization import build_grid, assemble_dirichlet_laplacian  # noqa: E402
from .eigensolver import solve_lowest, normalize_mode  # noqa: E402
from .fields import ScalarField, find_critical_points, classify, directional_field  # noqa: E402
from .contours import extract_level_curve  # noqa: E402

__all__ = [
    "DomainError", "DomainSpec", "NormalizedDomain", "make_family", "normalize_domain",
    "build_grid", "assemble_dirichlet_laplacian", "solve_lowest", "normalize_mode",
    "ScalarField", "find_critical_points", "classify", "directional_field",
    "extract_level_curve",
]

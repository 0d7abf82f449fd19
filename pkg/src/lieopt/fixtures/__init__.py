"""Built-in algebras, case parametrisations, optimal systems and exact solutions."""

from .algebras import DOCUMENTS, FIXED_ELEMENTS, builtin_algebra, fixed_elements
from .cases import CASES, CaseSpec, get_case
from .solutions import (ANNULUS, SECTOR, SOLUTIONS, ClosedFormSolution, GridSpec, LineGrid,
                        SingularGrid, ns_residual, reduced_ode_residual)
from .systems import DEFAULT_PARAMETERS, SYSTEMS, Representative, optimal_system

__all__ = [
    "DOCUMENTS", "FIXED_ELEMENTS", "builtin_algebra", "fixed_elements", "CASES", "CaseSpec", "get_case",
    "ANNULUS", "SECTOR", "SOLUTIONS", "ClosedFormSolution", "GridSpec", "LineGrid", "SingularGrid",
    "ns_residual", "reduced_ode_residual", "DEFAULT_PARAMETERS", "SYSTEMS", "Representative", "optimal_system",
]

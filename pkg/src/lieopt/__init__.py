"""Two-dimensional optimal systems of Lie subalgebras: exact algebra and numeric verification."""

from .algebra import (AlgebraError, JacobiViolation, LieAlgebra, ad_matrix, bracket,
                      commutator_table, jacobi_check, killing_form, load_algebra)
from .exppoly import ExpPoly, ep_equal, ep_eval, ep_mul, parse_exppoly
from .adjoint import (NonIntegerSpectrum, adjoint_factor, adjoint_table, apply_adjoint,
                      general_adjoint_matrix)
from .subalgebra import AlgebraPair, determined_equations, sample_constrained_pairs
from .invariants import (assemble_rational_invariants, check_invariant, discover_semi_invariants,
                         invariant_pde_system)
from .equivalence import EquivalenceQuery, SolverConfig, equivalence_solve, verify_optimal_system

__all__ = [
    "AlgebraError", "JacobiViolation", "LieAlgebra", "ad_matrix", "bracket", "commutator_table",
    "jacobi_check", "killing_form", "load_algebra", "ExpPoly", "ep_equal", "ep_eval", "ep_mul",
    "parse_exppoly", "NonIntegerSpectrum", "adjoint_factor", "adjoint_table", "apply_adjoint",
    "general_adjoint_matrix", "AlgebraPair", "determined_equations", "sample_constrained_pairs",
    "assemble_rational_invariants", "check_invariant", "discover_semi_invariants",
    "invariant_pde_system", "EquivalenceQuery", "SolverConfig", "equivalence_solve",
    "verify_optimal_system",
]

__version__ = "0.1.0"

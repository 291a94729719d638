"""Exact symbolic toolkit for Lie-Hamilton systems.

Expressions are sums of monomials with rational coefficients, integer powers
and rational powers of sign-definite variables.  On top of that sit vector
fields and Poisson bivectors, Lie algebra closure, Lie-Hamiltonian structure
checks, constants of motion, linearization and an RK4 integrator.
"""

from .errors import LieHamError
from .symexpr import Chart, CoeffFn, Expr, VarSpec, diff, eval_num, parse_expr, to_string
from .geom import (
    Bivector,
    OneForm,
    StructureConstants,
    VectorField,
    apply_vf,
    exterior_d,
    find_hamiltonian,
    hamiltonian_vf,
    hat_lambda,
    jacobi_check,
    lie_bracket_vf,
    lie_poisson_bivector,
    poisson_bracket,
)
from .liealg import closure_fn, closure_vf, distribution_rank
from .lieham import LHSystem, casimir_kernel, strong_comomentum_check, upsilon, verify_lh_structure
from .catalog import get_system

__version__ = "0.1.0"

__all__ = [
    "LieHamError",
    "Chart",
    "CoeffFn",
    "Expr",
    "VarSpec",
    "diff",
    "eval_num",
    "parse_expr",
    "to_string",
    "Bivector",
    "OneForm",
    "StructureConstants",
    "VectorField",
    "apply_vf",
    "exterior_d",
    "find_hamiltonian",
    "hamiltonian_vf",
    "hat_lambda",
    "jacobi_check",
    "lie_bracket_vf",
    "lie_poisson_bivector",
    "poisson_bracket",
    "closure_fn",
    "closure_vf",
    "distribution_rank",
    "LHSystem",
    "casimir_kernel",
    "strong_comomentum_check",
    "upsilon",
    "verify_lh_structure",
    "get_system",
]

"""Interlaced polynomial lattice rules for smooth integrands, constructed by a
fast component-by-component search."""

__version__ = "0.1.0"

from .errors import InvalidRuleError, SizeGuardError  # noqa: E402
from .gfpoly import GFPolynomial, find_primitive, is_irreducible, smallest_irreducible  # noqa: E402
from .lattice import PointSet, RuleSpec, generate_point_set  # noqa: E402
from .criterion import B_u, C_u, WeightProfile, theorem2_bound, wce_bound  # noqa: E402
from .cbc import cbc_construct, cbc_construct_fast, cbc_construct_naive, choose_interlacing  # noqa: E402

__all__ = [
    "__version__",
    "InvalidRuleError",
    "SizeGuardError",
    "GFPolynomial",
    "find_primitive",
    "is_irreducible",
    "smallest_irreducible",
    "PointSet",
    "RuleSpec",
    "generate_point_set",
    "B_u",
    "C_u",
    "WeightProfile",
    "theorem2_bound",
    "wce_bound",
    "cbc_construct",
    "cbc_construct_fast",
    "cbc_construct_naive",
    "choose_interlacing",
]

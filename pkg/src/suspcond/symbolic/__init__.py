"""Rule-based symbolic engine for the functional equations of the sphere problem."""
from .approx import (
    FunctionalSystem, canonical_form, conductivity_system, merge_alpha, procedure_u,
    reference_constant, reference_u, same_canonical, successive_approximation,
)
from .expr import (
    Add, CSym, Const, Coord, Dot, Inv, Mul, Node, Norm, Pow, Pt, R0, Reindex, Sum, X, ZSym,
    rename, reindex, substitute, to_sexpr, to_text,
)
from .rules import expand, is_normal, simplify
from .series import series_truncate, to_poly

"""Singular tetrahedron-product integrals by Taylor-Duffy reduction.

Typical use::

    from tetduffy import Tetrahedron, canonicalize_pair, build_reduced, tensor_integrate
    from tetduffy.formulations import FormulationSpec, Kind, build

    pair = canonicalize_pair(ta, tb)
    P, K = build(FormulationSpec(Kind.VEFIE_SWG, k=10, q_a=qa, q_b=qb))
    value = tensor_integrate(build_reduced(pair, P, K), n=25)
"""

from .cubature import CCRule, cc_rule, converge_sweep, tensor_integrate
from .errors import (
    DegenerateTetrahedron,
    NotEnoughCommonVertices,
    SingularityTooStrong,
    TetDuffyError,
)
from .formulations import FormulationSpec, Kind
from .geometry import Tetrahedron, TetPair, canonicalize_pair, quadratic_form, volume
from .kernels import Kernel, first_integral, first_integrals
from .polyalg import Polynomial, Var, parse
from .reduction import ReducedIntegrand, build_reduced, eval_reduced

__all__ = [
    "CCRule", "cc_rule", "converge_sweep", "tensor_integrate",
    "DegenerateTetrahedron", "NotEnoughCommonVertices", "SingularityTooStrong", "TetDuffyError",
    "FormulationSpec", "Kind",
    "Tetrahedron", "TetPair", "canonicalize_pair", "quadratic_form", "volume",
    "Kernel", "first_integral", "first_integrals",
    "Polynomial", "Var", "parse",
    "ReducedIntegrand", "build_reduced", "eval_reduced",
]

__version__ = "0.1.0"

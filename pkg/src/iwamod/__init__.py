"""Exact computations with finitely generated modules over Iwasawa algebras."""
from .errors import (
    ContextMismatch,
    ExhaustedRange,
    IndeterminateAtPrecision,
    IwamodError,
    NotInvertible,
    PoleAlongPrime,
    PrecisionError,
    PreconditionError,
    TruncationTooShort,
)
from .padic import PAdicScalar, RingContext, smith_normal_form
from .series import (
    Character,
    PSeries1,
    PSeries2,
    admissible_line_search,
    admissible_twist_search,
    involution,
    mu_lambda,
    twist,
    weierstrass_prepare,
)
from .finite import FiniteLevelModule
from .modules import (
    DottedModule,
    ElementaryModule,
    SquarePresentedModule,
    char_series,
    coinvariants_at_level,
    dot,
)
from .adjoint import adjoint_elementary, adjoint_presented, adjoint_via_limit, verify_prop_111
from .pairing import (
    FiniteForm,
    FracModElement,
    SesquiForm,
    check_axioms,
    exhaustive_square_search,
    functional_equation_check,
    nondegeneracy_test,
    specialize_height,
    specialize_torsion,
)
from .parity import ProjectiveSystem, guo_rank, lambda_congruence_check, parity_check

__version__ = "0.1.0"

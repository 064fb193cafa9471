import random

from hypothesis import given, settings, strategies as st

from iwamod.acceptance import criterion_4_modules, random_finite_module
from iwamod.adjoint import (
    AdjointLimit,
    adjoint_elementary,
    adjoint_presented,
    adjoint_via_limit,
    finite_level_adjoint,
    no_finite_submodule_check,
    verify_prop_111,
)
from iwamod.finite import FiniteLevelModule
from iwamod.modules import DottedModule, ElementaryModule, SquarePresentedModule, coinvariants_at_level
from iwamod.padic import RingContext
from iwamod.series import PSeries1

CTX = RingContext(3, 10, 32)


def E(*factors):
    return ElementaryModule(CTX, [PSeries1(CTX, f) for f in factors])


def test_finite_level_adjoint_action():
    N = FiniteLevelModule(RingContext(3, 2, 8), 1, [2], [[4]])
    A = finite_level_adjoint(N)
    # Pontryagin dual: gamma acts by the inverse; the adjoint is the dual of the dotted module
    assert N.pontryagin_dual().G() == [[7]]
    assert A.G() == [[4]]
    assert A.is_isomorphic_action(N.dotted().pontryagin_dual())


def test_T_minus_p_limit():
    lim = adjoint_via_limit(E([-3, 1]), 3)
    assert lim.level_exponents == [1, 2, 3, 4]
    assert lim.invariants == (0, 1)
    assert no_finite_submodule_check(lim) is True


def test_lambda_mod_p_limit():
    lim = adjoint_via_limit(E([3]), 3)
    assert lim.invariants == (1, 0)


def test_mixed_elementary_limit():
    lim = adjoint_via_limit(E([3], [-3, 1]), 3)
    assert lim.level_exponents == [2, 5, 12, 31]
    assert lim.invariants == (1, 1)


def test_finite_module_adjoint_vanishes():
    N = FiniteLevelModule(CTX, None, [2], [[4]])
    lim = adjoint_via_limit(N, 3)
    assert lim.vanishes
    assert no_finite_submodule_check(lim) is True


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_random_finite_adjoints_vanish(seed):
    N = random_finite_module(random.Random(seed), RingContext(3, 6, 32))
    assert adjoint_via_limit(N, 3).vanishes


def test_constant_kernel_tower_detected():
    ctx = RingContext(3, 4, 8)
    levels = [FiniteLevelModule(ctx, 0, [1], check=False) for _ in range(4)]
    lim = AdjointLimit.from_tower(levels, [[[1]]] * 3)
    assert no_finite_submodule_check(lim) is False


def test_closed_form_matches_limit():
    for f in ([-3, 1], [-9, 3], [3, 0, 1], [-3, -2, 1]):
        M = E(f)
        lim = adjoint_via_limit(M, 3)
        closed = adjoint_elementary(M)
        assert lim.level_exponents == [coinvariants_at_level(closed, n).order_exponent for n in range(4)]
    assert isinstance(adjoint_elementary(E([-3, 1]), dotted=True), DottedModule)


def test_presented_adjoint_is_transpose():
    A = [[PSeries1(CTX, [-3, 1]), PSeries1(CTX, [3])], [PSeries1(CTX, [0]), PSeries1(CTX, [-6, 1])]]
    M = SquarePresentedModule(CTX, A)
    T = adjoint_presented(M)
    assert T.matrix[0][1].coeffs == A[1][0].coeffs and T.matrix[1][0].coeffs == A[0][1].coeffs


def test_order_identity():
    M = E([-3, 1])
    for n in range(3):
        r = verify_prop_111(M, n)
        assert r.holds and r.left_exponent == n + 1 and r.a2_invariant_exponent == 0


def test_order_identity_with_finite_summand():
    F = FiniteLevelModule(CTX, None, [1], [[1]])
    for n in range(3):
        r = verify_prop_111(E([-3, 1]), n, finite_summand=F)
        assert r.holds and r.a2_invariant_exponent == 1


def test_order_identity_square_presentations():
    for M in criterion_4_modules(seed=7, count=5):
        for n in range(3):
            assert verify_prop_111(M, n).holds

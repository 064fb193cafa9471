import pytest
from hypothesis import given, settings, strategies as st

from iwamod.acceptance import lambda_examples
from iwamod.errors import IndeterminateAtPrecision, PreconditionError
from iwamod.modules import ElementaryModule
from iwamod.padic import RingContext
from iwamod.parity import (
    coinvariant_system,
    cyclic_tower,
    direct_sum_systems,
    divisor_profile,
    guo_rank,
    lambda_congruence_check,
    parity_check,
    symplectic_tower,
    zero_form_tower,
)
from iwamod.series import PSeries1

CTX = RingContext(3, 6, 4)


def test_coinvariants_of_T_minus_p():
    ctx = RingContext(3, 5, 32)
    sys_ = coinvariant_system(ElementaryModule(ctx, [PSeries1(ctx, [-3, 1])]), 2)
    assert [divisor_profile(sys_, n) for n in range(3)] == [(1,), (2,), (3,)]
    assert guo_rank(sys_).unbounded_count == 1


def test_lambda_two_tower_needs_enough_levels():
    ctx = RingContext(3, 6, 128)
    f = PSeries1(ctx, [-3, 1]) * PSeries1(ctx, [-6, 1])
    sys_ = coinvariant_system(ElementaryModule(ctx, [f]), 4)
    assert divisor_profile(sys_, 4) == (6, 4)
    assert guo_rank(sys_).unbounded_count == 2
    # at horizon 2 the second factor has not yet passed half the precision
    assert guo_rank(sys_, 2).unbounded_count == 1


def test_growing_plus_bounded_summand():
    s = direct_sum_systems([cyclic_tower(CTX, lambda n: n + 1, 4), cyclic_tower(CTX, lambda n: 1, 4)])
    assert guo_rank(s).unbounded_count == 1
    assert divisor_profile(s, 4) == (5, 1)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["grow", "const", "zero"]), min_size=1, max_size=3))
def test_guo_rank_counts_growing_summands(kinds):
    fns = {"grow": lambda n: n + 1, "const": lambda n: 2, "zero": lambda n: 0}
    s = direct_sum_systems([cyclic_tower(CTX, fns[k], 4) for k in kinds])
    assert guo_rank(s).unbounded_count == kinds.count("grow")


def test_symplectic_parity():
    for fn, want in ((lambda n: n + 1, 2), (lambda n: 2, 0)):
        v = parity_check(symplectic_tower(CTX, fn, 4))
        assert v.passed and v.rank == want and v.even


def test_odd_tower_refused():
    v = parity_check(zero_form_tower(CTX, lambda n: n + 1, 4))
    assert v.refused and not v.passed
    assert v.violations


def test_kernel_bound_permits_small_kernel():
    # Z/p with zero form: kernel killed by p, pairing profile on the quotient is empty
    v = parity_check(zero_form_tower(CTX, lambda n: 1, 3, bound=1))
    assert v.passed and v.rank == 0


def test_parity_needs_forms():
    with pytest.raises(PreconditionError):
        parity_check(cyclic_tower(CTX, lambda n: n, 3))


def test_guo_rank_needs_two_levels():
    with pytest.raises(IndeterminateAtPrecision):
        guo_rank(cyclic_tower(CTX, lambda n: 1, 0))


def test_lambda_congruence_examples():
    ctx = RingContext(3, 8, 12, 2)
    want = {"T2": [1, 3, 9], "p": [0, 0, 0], "(1+T1)-(1+T2)": [1, 1, 1]}
    for name, M, _ in lambda_examples(ctx):
        rep = lambda_congruence_check(M, (0, 1, 2))
        assert [rep.lambdas[n] for n in range(3)] == want[name]
        assert rep.holds


def test_lambda_congruence_flags_short_truncation():
    ctx = RingContext(3, 8, 8, 2)
    name, M, _ = lambda_examples(ctx)[1]
    rep = lambda_congruence_check(M, (0, 1, 2))
    assert rep.lambdas[2] is None and 2 in rep.flags


def test_lambda_congruence_rejects_one_variable():
    ctx = RingContext(3, 8, 12)
    with pytest.raises(PreconditionError):
        lambda_congruence_check(ElementaryModule(ctx, [PSeries1(ctx, [0, 1])]))

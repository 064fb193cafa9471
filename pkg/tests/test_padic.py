import itertools

import pytest
from hypothesis import given, settings, strategies as st

from iwamod.errors import ContextMismatch, NotInvertible
from iwamod.padic import (
    AtLeast,
    PAdicScalar,
    RingContext,
    balanced,
    cokernel_exponents,
    kernel_basis,
    mat_mul,
    smith_normal_form,
    solve,
    unit_inverse,
)


def test_product_wraps_to_one():
    ctx = RingContext(5, 3)
    assert (PAdicScalar(ctx, 124) * PAdicScalar(ctx, 124)).residue == 1


def test_mixed_contexts_refused():
    with pytest.raises(ContextMismatch):
        PAdicScalar(RingContext(3, 4), 1) + PAdicScalar(RingContext(3, 5), 1)


def test_zero_has_only_a_lower_bound():
    ctx = RingContext(3, 4)
    v = PAdicScalar(ctx, 0).valuation()
    assert isinstance(v, AtLeast) and v.bound == 4
    assert PAdicScalar(ctx, 18).valuation() == 2


def test_non_unit_inverse_raises():
    with pytest.raises(NotInvertible):
        unit_inverse(PAdicScalar(RingContext(3, 4), 6))


@given(st.integers(1, 10 ** 6), st.sampled_from([3, 5, 7]))
def test_unit_inverse(u, p):
    ctx = RingContext(p, 6)
    x = PAdicScalar(ctx, u * p + 1)
    assert (x * unit_inverse(x)).residue == 1


def test_balanced_lift():
    assert balanced(26, 27) == -1
    assert balanced(13, 27) == 13


def _brute_cokernel_order(A, mod):
    n = len(A)
    image = set()
    for v in itertools.product(range(mod), repeat=len(A[0])):
        image.add(tuple(sum(A[i][j] * v[j] for j in range(len(v))) % mod for i in range(n)))
    return mod ** n // len(image)


matrices = st.lists(st.lists(st.integers(0, 8), min_size=2, max_size=2), min_size=2, max_size=2)


@settings(max_examples=60)
@given(matrices)
def test_cokernel_matches_coset_count(A):
    exps = cokernel_exponents(A, 3, 2)
    assert 3 ** sum(exps) == _brute_cokernel_order(A, 9)


@settings(max_examples=60)
@given(st.lists(st.lists(st.integers(-40, 40), min_size=3, max_size=3), min_size=3, max_size=3))
def test_snf_transforms(A):
    p, a = 3, 4
    mod = p ** a
    r = smith_normal_form(A, p, a)
    D = mat_mul(mat_mul(r.left, A, mod), r.right, mod)
    for i in range(3):
        for j in range(3):
            want = r.diagonal[i] if i == j else 0
            assert D[i][j] % mod == want % mod
    assert r.exponents == sorted(r.exponents)


@settings(max_examples=40)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=2, max_size=2))
def test_kernel_vectors_and_solve(B):
    p, a = 3, 3
    mod = p ** a
    for z in kernel_basis(B, p, a):
        assert all(sum(B[i][j] * z[j] for j in range(3)) % mod == 0 for i in range(2))
    v = [sum(B[i][j] * c for j, c in enumerate((1, 2, 0))) for i in range(2)]
    x = solve(B, v, p, a)
    assert x is not None
    assert [sum(B[i][j] * x[j] for j in range(3)) % mod for i in range(2)] == [t % mod for t in v]

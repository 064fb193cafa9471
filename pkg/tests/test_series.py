import random

import pytest
from hypothesis import given, settings, strategies as st

from iwamod import poly
from iwamod.acceptance import random_prepared_series
from iwamod.errors import ContextMismatch, IndeterminateAtPrecision
from iwamod.padic import RingContext
from iwamod.series import (
    Character,
    PSeries1,
    PSeries2,
    admissible_line_search,
    admissible_twist_search,
    associates,
    cotorsion_test,
    divides,
    involution,
    mu_lambda,
    omega,
    quotient_order_exponent,
    twist,
    weierstrass_prepare,
)

CTX = RingContext(3, 8, 32)


def S(c, ctx=CTX):
    return PSeries1(ctx, c)


def test_geometric_series_inverse():
    geo = S([(-1) ** i for i in range(32)])
    assert (S([1, 1]) * geo).coeffs == S([1]).coeffs


def test_mixed_contexts_refused():
    with pytest.raises(ContextMismatch):
        S([1]) + PSeries1(RingContext(3, 9, 32), [1])


def test_multiply_back_p5():
    ctx = RingContext(5, 8, 32)
    f = S([1, 1, 0, 5], ctx) * S([-5, 1], ctx)
    w = weierstrass_prepare(f)
    assert (w.mu, w.lam) == (0, 1)
    assert w.reconstruct().coeffs == f.coeffs


def test_t_squared_plus_p():
    w = weierstrass_prepare(S([3, 0, 1]))
    assert (w.mu, w.lam) == (0, 2)
    assert list(w.distinguished) == [3, 0, 1]


def test_zero_series_is_indeterminate():
    with pytest.raises(IndeterminateAtPrecision):
        weierstrass_prepare(S([0]))


@settings(max_examples=40)
@given(st.integers(0, 3), st.lists(st.integers(1, 9), min_size=0, max_size=4))
def test_constructed_products(mu, roots):
    f = S([3 ** mu])
    for c in roots:
        f = f * S([-3 * c, 1])
    assert mu_lambda(f) == (mu, len(roots))


@settings(max_examples=50)
@given(st.integers(0, 10 ** 6), st.sampled_from([3, 5]))
def test_reconstruction(seed, p):
    ctx = RingContext(p, 8, 32)
    rng = random.Random(seed)
    mu, lam = rng.randint(0, 3), rng.randint(0, 8)
    f = random_prepared_series(rng, ctx, mu, lam)
    w = weierstrass_prepare(f)
    assert (w.mu, w.lam) == (mu, lam)
    assert w.reconstruct().coeffs == f.coeffs


def test_involution_of_T():
    assert involution(S([0, 1])).coeffs[:5] == tuple(x % 3 ** 8 for x in (0, -1, 1, -1, 1))


@settings(max_examples=30)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=6))
def test_involution_is_involutive(c):
    f = S(c)
    assert involution(involution(f)).coeffs == f.coeffs


def test_involution_of_omega_is_associate():
    for n in range(3):
        w = omega(CTX, n)
        iw = involution(w)
        # iota(omega_n) = -(1+T)^{-p^n} omega_n
        unit = S([1, 1]) ** (3 ** n)
        assert (iw * unit).coeffs == (-w).coeffs
        assert associates(w, iw)


def test_twist_of_T():
    u = 4
    assert twist(S([0, 1]), Character.of(CTX, u), 1).coeffs[:2] == (u - 1, u)


def test_omega_quotient():
    p, mod = 3, 3 ** 8
    for n in range(2):
        q, r = poly.divmod_monic(poly.omega(p, n + 1, mod), poly.omega(p, n, mod), mod)
        assert not any(r)
        phi = [0]
        for i in range(p):
            phi = poly.add(phi, poly.power([1, 1], i * p ** n, mod), mod)
        assert poly.trim(q) == poly.trim(phi)


def test_cotorsion_of_T_minus_p():
    f = S([-3, 1])
    for n in range(4):
        assert cotorsion_test(f, n)
        assert quotient_order_exponent(f, n) == n + 1
    assert not cotorsion_test(S([0, 1]), 0)


def test_divides():
    f, g = S([-3, 1]), S([-3, 1]) * S([3, 0, 1])
    assert divides(f, g)
    assert not divides(S([-6, 1]), g)


def test_twist_search():
    res = admissible_twist_search(S([0, 1]), Character.of(CTX, 4), range(0, 4), 2)
    assert res.value == 1 and res.rejected == (0,)


def test_twist_search_skips_constructed_zeros():
    chi = Character.of(CTX, 4)
    H = S([1])
    for j in (0, 1, 2):
        H = H * twist(S([0, 1]), chi, -j)
    res = admissible_twist_search(H, chi, range(0, 5), 2)
    assert res.rejected == (0, 1, 2) and res.value == 3


def test_line_search():
    ctx = RingContext(3, 8, 16, 2)
    F = PSeries2(ctx, [[0, ctx.modulus - 1], [1]])
    res = admissible_line_search(F, range(1, 4), 2)
    assert res.value == 2 and res.rejected == (1,)

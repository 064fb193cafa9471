import pytest
from hypothesis import given, settings, strategies as st

from iwamod.errors import PrecisionError
from iwamod.finite import FiniteLevelModule
from iwamod.modules import (
    ElementaryModule,
    InfiniteAtPrecision,
    SquarePresentedModule,
    char_series,
    coinvariant_level,
    coinvariants_at_level,
    fit_growth,
    iwasawa_invariants_via_growth,
    is_pseudo_null,
    order_report,
    transition_matrix,
    zp_torsion_and_rank,
)
from iwamod.padic import RingContext, rank_mod_p
from iwamod.parity import projection_matrix
from iwamod.series import PSeries1, mu_lambda

CTX = RingContext(3, 10, 32)


def E(*factors):
    return ElementaryModule(CTX, [PSeries1(CTX, f) for f in factors])


def test_T_minus_p_levels():
    M = E([-3, 1])
    for n in range(4):
        c = coinvariants_at_level(M, n)
        assert c.exponents == (n + 1,)
        assert c.G()[0][0] % 3 ** (n + 1) == 4 % 3 ** (n + 1)


def test_lambda_mod_p_is_elementary_abelian():
    c = coinvariants_at_level(E([3]), 2)
    assert c.exponents == (1,) * 9


def test_T_has_infinite_coinvariants():
    c = coinvariants_at_level(E([0, 1]), 1)
    assert isinstance(c, InfiniteAtPrecision)
    assert c.free_rank == 1


def test_torsion_and_rank_split():
    assert zp_torsion_and_rank([10, 1], [11, 1], 10) == ((1,), 1)
    with pytest.raises(PrecisionError):
        zp_torsion_and_rank([10, 1], [10, 2], 10)


def test_corestriction_surjective_and_norm_injective():
    M = E([-3, 1])
    for n in range(3):
        lo, up = coinvariant_level(M, n), coinvariant_level(M, n + 1)
        assert rank_mod_p(projection_matrix(lo, up, 3), 3) == 1
        # the norm Z/p^{n+1} -> Z/p^{n+2} is multiplication by a p-adic unit times p
        t = transition_matrix(lo, up, 3)
        assert t[0][0] % 3 == 0 and t[0][0] % 9 != 0


def test_growth_oracles():
    g = iwasawa_invariants_via_growth(E([-3, 1]), range(4))
    assert (g.mu, g.lam, g.nu) == (0, 1, 1)
    g = iwasawa_invariants_via_growth(E([-9, 3]), range(4))
    assert (g.mu, g.lam) == (1, 1)
    assert fit_growth(3, [1, 2, 3], [3 + 2, 9 + 3, 27 + 4]).nu == 1


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1), st.lists(st.integers(1, 4), max_size=2))
def test_growth_matches_char_series(mu, roots):
    f = PSeries1(CTX, [3 ** mu])
    for c in roots:
        f = f * PSeries1(CTX, [-3 * c, 1])
    if mu == 0 and not roots:
        return
    M = ElementaryModule(CTX, [f])
    g = iwasawa_invariants_via_growth(M, range(4))
    assert (g.mu, g.lam) == mu_lambda(char_series(M)) == (mu, len(roots))


def test_square_presentation_growth():
    A = [[PSeries1(CTX, [-3, 1]), PSeries1(CTX, [3])], [PSeries1(CTX, [1]), PSeries1(CTX, [-6, 1])]]
    M = SquarePresentedModule(CTX, A)
    g = iwasawa_invariants_via_growth(M, range(4))
    assert (g.mu, g.lam) == mu_lambda(char_series(M))
    # transpose has the same characteristic series
    assert char_series(M.transpose()).coeffs == char_series(M).coeffs


def test_pseudo_null():
    F = FiniteLevelModule(CTX, None, [2], [[4]])
    assert is_pseudo_null(F)
    assert not is_pseudo_null(E([-3, 1]))


def test_order_report_levels():
    rep = order_report(E([3], [-3, 1]), range(4))
    assert rep.exponents == (2, 5, 12, 31)

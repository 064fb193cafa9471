import itertools

import pytest
from hypothesis import given, settings, strategies as st

from iwamod.errors import PreconditionError
from iwamod.finite import FiniteLevelModule, dual_matrix, quotient
from iwamod.padic import RingContext, mat_mul, transpose

CTX = RingContext(3, 4, 8)


def test_kernel_of_gamma_minus_one():
    # Z/9 with gamma = 1 + p: gamma - 1 is multiplication by 3
    N = FiniteLevelModule(RingContext(3, 2, 8), 1, [2], [[4]])
    assert N.invariants(0).exponents == (1,)


def test_cyclic_permutation_coinvariants():
    G = [[0, 0, 1], [1, 0, 0], [0, 1, 0]]
    N = FiniteLevelModule(CTX, 1, [1, 1, 1], G)
    assert N.coinvariants(0).exponents == (1,)
    assert N.invariants(0).exponents == (1,)


def test_bad_level_refused():
    with pytest.raises(PreconditionError):
        FiniteLevelModule(CTX, 0, [2], [[4]])


def test_ill_defined_action_refused():
    # Z/3 -> Z/9 component must be divisible by 3
    with pytest.raises(PreconditionError):
        FiniteLevelModule(CTX, None, [2, 1], [[1, 1], [0, 1]])


def test_dual_action_is_inverse_transpose():
    N = FiniteLevelModule(RingContext(3, 2, 8), 1, [2], [[4]])
    D = N.pontryagin_dual()
    assert D.exponents == N.exponents
    assert (D.G()[0][0] * 4) % 9 == 1


@settings(max_examples=30)
@given(st.integers(0, 26), st.integers(0, 8), st.integers(0, 2))
def test_double_dual(x, y, z):
    G = [[1 + 3 * (x % 3), 3 * y], [z, 1 + 3 * (x // 9)]]
    N = FiniteLevelModule(CTX, None, [2, 1], G)
    DD = N.pontryagin_dual().pontryagin_dual()
    assert DD.exponents == N.exponents
    assert N.is_isomorphic_action(DD)


def test_dual_matrix_is_adjoint():
    # <phi x, f> = <x, phi^T f> on Z/9 + Z/3
    exps = (2, 1)
    phi = [[2, 3], [1, 1]]
    D = dual_matrix(phi, exps, exps, 3)
    for x in itertools.product(range(9), range(3)):
        for f in itertools.product(range(9), range(3)):
            lhs = sum(((phi[i][0] * x[0] + phi[i][1] * x[1]) * f[i]) * 3 ** (2 - exps[i]) for i in range(2)) % 9
            Df = [D[i][0] * f[0] + D[i][1] * f[1] for i in range(2)]
            rhs = sum(x[i] * Df[i] * 3 ** (2 - exps[i]) for i in range(2)) % 9
            assert lhs == rhs


def _brute_structure(exps, rels, p):
    """Sizes of the p^k-torsion of the quotient, k = 0, 1, 2."""
    mods = [p ** e for e in exps]
    elems = list(itertools.product(*[range(m) for m in mods]))
    sub = {tuple([0] * len(exps))}
    frontier = list(sub)
    while frontier:
        new = []
        for s in frontier:
            for r in rels:
                t = tuple((a + b) % m for a, b, m in zip(s, r, mods))
                if t not in sub:
                    sub.add(t)
                    new.append(t)
        frontier = new
    sizes = []
    for k in range(3):
        killed = sum(1 for x in elems if tuple(p ** k * a % m for a, m in zip(x, mods)) in sub)
        sizes.append(killed // len(sub))
    return sizes


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8), st.integers(0, 2)), min_size=0, max_size=2))
def test_quotient_matches_enumeration(rels):
    exps = (2, 2, 1)
    pres = quotient(3, 4, exps, [list(r) for r in rels])
    sizes = _brute_structure(exps, [list(r) for r in rels], 3)
    assert sizes == [3 ** sum(min(e, k) for e in pres.exponents) for k in range(3)]
    assert 3 ** sum(pres.exponents) == sizes[-1]

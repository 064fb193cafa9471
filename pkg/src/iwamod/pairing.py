"""Sesquilinear pairings M x M' -> Frac(Lambda)/Lambda and their finite-level shadows.

Conventions: Theta(l x, y) = l Theta(x, y) and Theta(x, l y) = iota(l) Theta(x, y).
At level n the value of a class z in Frac(Lambda_n)/Lambda_n is read in Q_p/Z_p
through the coefficient of the identity element of Gamma/Gamma_n.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from . import poly
from .errors import (
    IndeterminateAtPrecision,
    PoleAlongPrime,
    PreconditionError,
    PrecisionError,
)
from .finite import FiniteLevelModule, submodule
from .modules import ElementaryModule, coinvariant_level, coinvariants_at_level
from .padic import Matrix, RingContext, balanced, kernel_basis, rank_mod_p, smith_normal_form
from .series import (
    PSeries1,
    PSeries2,
    divides,
    involution,
    weierstrass_prepare,
)

_S = sympy.Symbol("S")
_T = sympy.Symbol("T")


def rational_lift(x: int, mod: int) -> Fraction:
    """Smallest rational n/d with n = d x mod ``mod`` (falls back to the balanced lift)."""
    x %= mod
    bound = int((mod // 2) ** 0.5)
    r0, r1, s0, s1 = mod, x, 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1, s0, s1 = r1, r0 - q * r1, s1, s0 - q * s1
    if s1 != 0 and abs(s1) <= bound and np.gcd(s1, mod) == 1:
        return Fraction(r1, s1)
    return Fraction(balanced(x, mod))


def frac_mod1(x: Fraction, p: int) -> Fraction:
    """Representative in [0, 1) with p-power denominator of x mod Z_p."""
    x = Fraction(x)
    d, k = x.denominator, 0
    while d % p == 0:
        d //= p
        k += 1
    if k == 0:
        return Fraction(0)
    pk = p ** k
    return Fraction(x.numerator * pow(d, -1, pk) % pk, pk)


def serialize_value(x: Fraction, p: int) -> Tuple[int, int]:
    """Q_p/Z_p value with p-power denominator as (numerator, k) meaning numerator / p^k."""
    x = frac_mod1(x, p)
    d, k = x.denominator, 0
    while d % p == 0:
        d //= p
        k += 1
    return x.numerator, k


# --- Frac(Lambda)/Lambda --------------------------------------------------------

@dataclass(frozen=True)
class FracModElement:
    """The class of g/f in Frac(Lambda)/Lambda."""

    num: PSeries1
    den: PSeries1

    def __post_init__(self):
        if self.den.is_zero():
            raise PreconditionError("denominator is zero at precision")

    @property
    def ctx(self) -> RingContext:
        return self.num.ctx

    @classmethod
    def zero(cls, ctx: RingContext) -> "FracModElement":
        return cls(PSeries1(ctx, []), PSeries1.constant(ctx, 1))

    @classmethod
    def of(cls, ctx: RingContext, num: Sequence[int], den: Sequence[int]) -> "FracModElement":
        return cls(PSeries1(ctx, num), PSeries1(ctx, den))

    def is_integral(self) -> bool:
        return divides(self.den, self.num)

    def times(self, lam: PSeries1) -> "FracModElement":
        return FracModElement(self.num * lam, self.den)

    def involute(self) -> "FracModElement":
        return FracModElement(involution(self.num), involution(self.den))

    def __add__(self, other: "FracModElement") -> "FracModElement":
        return FracModElement(self.num * other.den + other.num * self.den, self.den * other.den)

    def __sub__(self, other: "FracModElement") -> "FracModElement":
        return FracModElement(self.num * other.den - other.num * self.den, self.den * other.den)

    def equals(self, other: "FracModElement", precision: Optional[int] = None) -> bool:
        return divides(self.den * other.den, self.num * other.den - other.num * self.den, precision)

    def canonical(self) -> Tuple[int, Tuple[int, ...], Tuple[int, ...]]:
        """(mu, distinguished part, remainder) with g/f = r / (p^mu P) + (integral part mod p^-mu)."""
        w = weierstrass_prepare(self.den)
        mod = self.ctx.modulus
        uinv = poly.inverse_series(list(w.unit.coeffs), mod, self.ctx.m)
        g = poly.mul(list(self.num.coeffs), uinv, mod, self.ctx.m)
        _, r = poly.divmod_monic(g, list(w.distinguished), mod)
        return w.mu, tuple(w.distinguished), tuple(x % self.ctx.p ** w.precision for x in r)

    def to_dict(self) -> dict:
        return {"num": self.num.to_list(), "den": self.den.to_list()}


@dataclass
class SesquiForm:
    """Theta : M x M' -> Frac(Lambda)/Lambda on elementary modules, by generator values."""

    M: ElementaryModule
    Mp: ElementaryModule
    entries: List[List[FracModElement]]

    def __post_init__(self):
        if len(self.entries) != len(self.M.factors) or any(len(r) != len(self.Mp.factors) for r in self.entries):
            raise PreconditionError("entry matrix must be (#factors of M) x (#factors of M')")
        if self.M.two_variable or self.Mp.two_variable:
            raise PreconditionError("pairings are modelled on one-variable modules")

    @property
    def ctx(self) -> RingContext:
        return self.M.ctx

    def well_definedness_failures(self) -> List[Tuple[int, int, str]]:
        out = []
        for i, f in enumerate(self.M.factors):
            for j, fp in enumerate(self.Mp.factors):
                th = self.entries[i][j]
                if not th.times(f).is_integral():
                    out.append((i, j, "not killed by f_i"))
                if not th.times(involution(fp)).is_integral():
                    out.append((i, j, "not killed by iota(f'_j)"))
        return out

    def swap(self) -> "SesquiForm":
        """Transposed and involuted form on M' x M."""
        d, dp = len(self.M.factors), len(self.Mp.factors)
        ent = [[self.entries[i][j].involute() for i in range(d)] for j in range(dp)]
        return SesquiForm(self.Mp, self.M, ent)

    def direct_sum(self, other: "SesquiForm") -> "SesquiForm":
        ctx = self.ctx
        z = FracModElement.zero(ctx)
        d1, e1 = len(self.M.factors), len(self.Mp.factors)
        d2, e2 = len(other.M.factors), len(other.Mp.factors)
        ent = [list(r) + [z] * e2 for r in self.entries] + [[z] * e1 + list(r) for r in other.entries]
        return SesquiForm(ElementaryModule(ctx, self.M.factors + other.M.factors),
                          ElementaryModule(ctx, self.Mp.factors + other.Mp.factors), ent)


@dataclass
class FiniteForm:
    """Bilinear N x N' -> Q_p/Z_p given on generators (entries are Fractions mod 1)."""

    N: FiniteLevelModule
    Np: FiniteLevelModule
    matrix: List[List[Fraction]]
    galois: bool = False
    alternating: bool = False
    symmetric: bool = False

    def __post_init__(self):
        self.matrix = [[frac_mod1(Fraction(x), self.N.p) for x in row] for row in self.matrix]
        if len(self.matrix) != self.N.rank or any(len(r) != self.Np.rank for r in self.matrix):
            raise PreconditionError("form matrix shape does not match the modules")

    @property
    def p(self) -> int:
        return self.N.p

    def value(self, x: Sequence[int], y: Sequence[int]) -> Fraction:
        s = sum((Fraction(xu * yv) * self.matrix[u][v] for u, xu in enumerate(x) if xu for v, yv in enumerate(y) if yv), Fraction(0))
        return frac_mod1(s, self.p)

    def scaled(self, a: int) -> Matrix:
        """Integer matrix p^a * B mod p^a."""
        mod = self.p ** a
        out = []
        for row in self.matrix:
            r = []
            for x in row:
                y = x * mod
                if y.denominator != 1:
                    raise PrecisionError("form value denominator exceeds p^a")
                r.append(int(y) % mod)
            out.append(r)
        return out

    def serialized(self) -> List[List[Tuple[int, int]]]:
        return [[serialize_value(x, self.p) for x in row] for row in self.matrix]

    def to_dict(self) -> dict:
        return {
            "N": self.N.to_dict(),
            "Np": self.Np.to_dict(),
            "matrix": [[list(v) for v in row] for row in self.serialized()],
            "flags": {"galois": self.galois, "alternating": self.alternating, "symmetric": self.symmetric},
        }


# --- finite-level evaluation ----------------------------------------------------

def _t_to_s(coeffs: Sequence, N: int) -> List:
    """Coefficients in the group basis S = 1+T of a polynomial of degree < N in T."""
    out = [0] * N
    for j, c in enumerate(coeffs):
        if not c:
            continue
        for k in range(j + 1):
            out[k] += c * comb(j, k) * (-1) ** (j - k)
    return out


def _poly_in_S(coeffs: Sequence) -> sympy.Poly:
    cs = [Fraction(c) for c in coeffs] or [Fraction(0)]
    T = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(cs)], _T, domain="QQ")
    return sympy.Poly(T.as_expr().subs(_T, _S - 1), _S, domain="QQ")


def _group_ring_quotient(g: Sequence, h: Sequence, N: int) -> List[Fraction]:
    """g/h in Q[S]/(S^N - 1), coefficients of S^0..S^{N-1}; g, h polynomials in T."""
    modp = sympy.Poly(_S ** N - 1, _S, domain="QQ")
    gS = _poly_in_S(g).rem(modp)
    hS = _poly_in_S(h).rem(modp)
    try:
        inv = hS.invert(modp)
    except (sympy.polys.polyerrors.NotInvertible, ZeroDivisionError):
        raise PoleAlongPrime(f"denominator not prime to omega at level with |Gamma/Gamma_n| = {N}")
    z = (gS * inv).rem(modp)
    cs = z.all_coeffs()[::-1]
    cs = cs + [0] * (N - len(cs))
    return [Fraction(int(sympy.Rational(c).p), int(sympy.Rational(c).q)) for c in cs]


def epsilon_matrix(theta: FracModElement, n: int) -> List[List[Fraction]]:
    """Z with eps(x * iota(y) * theta) = xS^T Z yS, xS and yS in the group basis."""
    p = theta.ctx.p
    N = p ** n
    mod = theta.ctx.modulus
    g = [balanced(x, mod) for x in theta.num.coeffs]
    h = [balanced(x, mod) for x in theta.den.coeffs]
    z = _group_ring_quotient(g, h, N)
    return [[z[(l - k) % N] for l in range(N)] for k in range(N)]


def _split_blocks(v: Sequence[int], blocks: Sequence[int]) -> List[List[int]]:
    out, pos = [], 0
    for b in blocks:
        out.append(list(v[pos:pos + b]))
        pos += b
    return out


def specialize_torsion(theta: SesquiForm, n: int) -> FiniteForm:
    """t_p(Theta) at p = (gamma^{p^n} - 1) on the (finite) coinvariants of M and M'."""
    for mod_ in (theta.M, theta.Mp):
        c = coinvariants_at_level(mod_, n)
        if not isinstance(c, FiniteLevelModule):
            raise PreconditionError(f"coinvariants at level {n} are not finite at precision", level=n)
    L = coinvariant_level(theta.M, n)
    Lp = coinvariant_level(theta.Mp, n)
    p = theta.ctx.p
    mod = theta.ctx.modulus
    N = p ** n
    Z = {}
    for i in range(len(theta.M.factors)):
        for j in range(len(theta.Mp.factors)):
            th = theta.entries[i][j]
            if th.num.is_zero():
                continue
            Z[i, j] = epsilon_matrix(th, n)
    for Zij in Z.values():
        for row in Zij:
            for x in row:
                _, k = serialize_value(Fraction(x), p)
                if k > theta.ctx.a:
                    raise PrecisionError("pairing denominators exceed the working precision")
    xs = [[_t_to_s([balanced(c, mod) for c in blk], N) for blk in _split_blocks(s, L.blocks)] for s in L.presentation.sect]
    ys = [[_t_to_s([balanced(c, mod) for c in blk], N) for blk in _split_blocks(s, Lp.blocks)] for s in Lp.presentation.sect]
    B = []
    for xu in xs:
        row = []
        for yv in ys:
            acc = Fraction(0)
            for (i, j), Zij in Z.items():
                xi, yj = xu[i], yv[j]
                for k, xk in enumerate(xi):
                    if xk:
                        Zk = Zij[k]
                        acc += xk * sum((yl * Zk[l] for l, yl in enumerate(yj) if yl), Fraction(0))
            row.append(frac_mod1(acc, p))
        B.append(row)
    return FiniteForm(L.module, Lp.module, B, galois=True)


# --- height specialization ------------------------------------------------------

@dataclass
class HeightForm:
    level: int
    generator_unit: int
    matrix: List[List[int]]
    exact: List[List[Fraction]]
    free_rank: int
    free_rank_prime: int
    agree: bool
    precision: int
    qualifier: dict

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "generator": f"{self.generator_unit}*omega_{self.level}",
            "matrix": self.matrix,
            "exact": [[str(x) for x in r] for r in self.exact],
            "free_ranks": [self.free_rank, self.free_rank_prime],
            "routes_agree": self.agree,
            "precision": self.precision,
            "qualifier": self.qualifier,
        }


def _free_parts(f: PSeries1, n: int) -> Tuple[List[List[int]], List[List[int]], Tuple[int, ...]]:
    """Free generators of Lambda/(f) modulo omega_n and of its omega_n-kernel (coordinates mod P)."""
    w = weierstrass_prepare(f)
    if w.mu:
        raise PreconditionError("height specialization requires mu = 0 factors")
    ctx = f.ctx
    p, a = ctx.p, ctx.a
    P = list(w.distinguished)
    if w.lam == 0:
        return [], [], tuple(P)
    res = []
    for b in (a, a + 1):
        mod = p ** b
        Wm = poly.mult_matrix(poly.omega(p, n, mod), [x % mod for x in P], mod)
        res.append(smith_normal_form(Wm, p, b))
    lo, hi = res
    zero_lo = [k for k, e in enumerate(lo.exponents) if e >= a]
    zero_hi = [k for k, e in enumerate(hi.exponents) if e >= a + 1]
    if len(zero_lo) != len(zero_hi):
        raise IndeterminateAtPrecision("free rank undetermined at precision")
    mod = p ** a
    coker = [[row[k] % mod for row in lo.left_inv] for k in zero_lo]
    ker = [[row[k] % mod for row in lo.right] for k in zero_lo]
    return coker, ker, tuple(P)


def _iota_rational(expr):
    return expr.subs(_T, 1 / (1 + _T) - 1)


def _eps_rational(expr, N: int) -> Tuple[Fraction, int]:
    """eps of a rational function in Q[S]/(S^N - 1), plus the p-adic digits its denominator can cost.

    Inverting h modulo S^N - 1 divides by the resultant of h and S^N - 1, so
    inputs known mod p^a give an output known mod p^(a - v_p(resultant)).
    """
    num, den = sympy.fraction(sympy.cancel(sympy.together(expr)))
    pn = sympy.Poly(num, _T, domain="QQ").all_coeffs()[::-1]
    pd = sympy.Poly(den, _T, domain="QQ").all_coeffs()[::-1]
    z = _group_ring_quotient([Fraction(int(c.p), int(c.q)) for c in map(sympy.Rational, pn)],
                             [Fraction(int(c.p), int(c.q)) for c in map(sympy.Rational, pd)], N)
    res = sympy.resultant(sympy.Poly(den, _T, domain="QQ"), sympy.Poly((1 + _T) ** N - 1, _T, domain="QQ"))
    return z[0], Fraction(int(sympy.Rational(res).p), int(sympy.Rational(res).q))


def _frac_val(x: Fraction, p: int, cap: int) -> int:
    if x == 0:
        return cap
    v, a, b = 0, x.numerator, x.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return min(v, cap)


def specialize_height(theta: SesquiForm, n: int, generator_unit: int = 1) -> HeightForm:
    """l_p(Theta) for the generator pi = c * omega_n: (x, y) -> eps(iota(pi) x iota(y) Theta).

    x runs over free generators of M/omega_n, y over free generators of the
    omega_n-kernel of M'.  Computed on truncated series mod p^a and, as a
    second route, with exact rational functions on rational lifts.
    """
    ctx = theta.ctx
    p, a, m = ctx.p, ctx.a, ctx.m
    mod = ctx.modulus
    if generator_unit % p == 0:
        raise PreconditionError("generator scaling must be a unit")
    N = p ** n
    if m <= N:
        raise PrecisionError("truncation too short for this level")
    xs_all = [(i, x) for i, f in enumerate(theta.M.factors) for x in _free_parts(f, n)[0]]
    ys_all = [(j, y) for j, f in enumerate(theta.Mp.factors) for y in _free_parts(f, n)[1]]
    om = PSeries1(ctx, poly.omega(p, n, mod))
    iota_pi = involution(om) * PSeries1.constant(ctx, generator_unit)
    lam_h = max((weierstrass_prepare(e.den).lam for r in theta.entries for e in r), default=0)
    a_eff = min(a, max(1, (m - lam_h) // N))
    mod_eff = p ** a_eff
    w_poly = poly.omega(p, n, mod)
    Tq = _T
    om_q = (1 + Tq) ** N - 1
    iota_pi_q = generator_unit * _iota_rational(om_q)
    R1, R2 = [], []
    agree = True
    a_cmp = a_eff
    for i, x in xs_all:
        r1, r2 = [], []
        for j, y in ys_all:
            th = theta.entries[i][j]
            if th.num.is_zero():
                r1.append(0)
                r2.append(Fraction(0))
                continue
            wh = weierstrass_prepare(th.den)
            if wh.mu:
                raise PreconditionError("height specialization requires mu = 0 denominators")
            numer = iota_pi * PSeries1(ctx, x) * involution(PSeries1(ctx, y)) * th.num
            uinv = poly.inverse_series(list(wh.unit.coeffs), mod, m)
            g = poly.mul(list(numer.coeffs), uinv, mod, m)
            q, r = poly.divmod_monic(g, list(wh.distinguished), mod)
            if any(c % mod_eff for c in r):
                raise PreconditionError("Theta(x, y) has a pole along omega_n: form not well defined")
            red = poly.reduce_mod(q, w_poly, mod)
            v1 = sum(c * (-1) ** k for k, c in enumerate(red)) % mod
            r1.append(v1)
            lift = lambda cs: sum(sympy.Rational(rational_lift(c, mod).numerator, rational_lift(c, mod).denominator) * Tq ** k
                                  for k, c in enumerate(cs) if c % mod)
            expr = iota_pi_q * lift(x) * _iota_rational(lift(y)) * lift(th.num.poly()) / lift(th.den.poly())
            v2, res = _eps_rational(expr, N)
            r2.append(v2)
            # the exact route inherits the p^a rounding of the lifts, amplified by the resultant
            a_cmp = min(a_cmp, a - max(0, _frac_val(res, p, a)))
            if _frac_val(v2 - v1, p, a) < a_cmp:
                agree = False
        R1.append(r1)
        R2.append(r2)
    if a_cmp < 1:
        raise IndeterminateAtPrecision("no p-adic digits of the height survive at this precision")
    R1 = [[v % p ** a_cmp for v in r] for r in R1]
    return HeightForm(n, generator_unit, R1, R2, len(xs_all), len(ys_all), agree, a_cmp,
                      ctx.qualifier(level=n, precision_effective=a_cmp))


# --- nondegeneracy ----------------------------------------------------------------

def map_kernel(p: int, a: int, src: Sequence[int], tgt: Sequence[int], M: Matrix):
    """Kernel of the map sum Z/p^src -> sum Z/p^tgt given by M (rows: target)."""
    r, s = len(tgt), len(src)
    mod = p ** a
    if s == 0:
        return submodule(p, a, [], [])
    cols = [[M[i][j] % mod for i in range(r)] for j in range(s)]
    cols += [[(p ** e if i == k else 0) % mod for i in range(r)] for k, e in enumerate(tgt)]
    if r == 0:
        gens = [[int(i == j) for i in range(s)] for j in range(s)]
    else:
        B = [list(row) for row in zip(*cols)]
        gens = [z[:s] for z in kernel_basis(B, p, a)]
    return submodule(p, a, list(src), gens)


@dataclass
class Nondegeneracy:
    nondegenerate: bool
    left_kernel_exponents: List[int]
    right_kernel_exponents: List[int]
    left_kernel_generators: List[List[int]]
    right_kernel_generators: List[List[int]]
    cokernel_exponent: int
    determinant_route: bool
    qualifier: dict

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def form_nondegeneracy(form: FiniteForm) -> Nondegeneracy:
    N, Np = form.N, form.Np
    p = N.p
    a = max([N.ctx.a] + list(N.exponents) + list(Np.exponents))
    B = form.scaled(a)
    # x -> B(x, .) lands in Hom(N', Q/Z) = sum Z/p^{e'_v}; coordinate v is p^{e'_v} B(x, e'_v)
    to_dual = [[B[u][v] // p ** (a - Np.exponents[v]) for u in range(N.rank)] for v in range(Np.rank)]
    from_dual = [[B[u][v] // p ** (a - N.exponents[u]) for v in range(Np.rank)] for u in range(N.rank)]
    lk = map_kernel(p, a, N.exponents, Np.exponents, to_dual)
    rk = map_kernel(p, a, Np.exponents, N.exponents, from_dual)
    img = N.order_exponent - sum(lk.exponents)
    coker = Np.order_exponent - img
    det_ok = N.rank == Np.rank and (N.rank == 0 or rank_mod_p(to_dual, p) == N.rank)
    nondeg = not lk.exponents and not rk.exponents
    if nondeg != det_ok:
        raise PrecisionError("kernel and determinant criteria disagree")
    return Nondegeneracy(nondeg, list(lk.exponents), list(rk.exponents), lk.sect, rk.sect, coker, det_ok,
                         N.ctx.qualifier(level=N.level))


def nondegeneracy_test(theta, n: Optional[int] = None) -> Nondegeneracy:
    """Kernel criterion for t_p(Theta) (or a FiniteForm), cross-checked by the determinant mod p."""
    form = theta if isinstance(theta, FiniteForm) else specialize_torsion(theta, n)
    return form_nondegeneracy(form)


# --- axioms ------------------------------------------------------------------------

@dataclass
class AxiomReport:
    results: Dict[str, bool]
    counterexamples: Dict[str, object]
    exhaustive: bool
    qualifier: dict

    @property
    def passed(self) -> bool:
        return all(self.results.values())

    def to_dict(self) -> dict:
        return {"results": self.results, "counterexamples": {k: str(v) for k, v in self.counterexamples.items()},
                "exhaustive": self.exhaustive, "qualifier": self.qualifier}


def _unit_vectors(r: int) -> List[List[int]]:
    return [[int(i == j) for i in range(r)] for j in range(r)]


def check_axioms(form, partner=None, claims: Optional[Sequence[str]] = None, exhaustive_limit: int = 6) -> AxiomReport:
    """Verify claimed axioms; a counterexample pair is recorded for each failure."""
    res: Dict[str, bool] = {}
    bad: Dict[str, object] = {}
    if isinstance(form, SesquiForm):
        claims = list(claims or ["well_defined"] + (["swap"] if partner is not None else []))
        if "well_defined" in claims:
            fails = form.well_definedness_failures()
            res["well_defined"] = not fails
            if fails:
                bad["well_defined"] = fails[0]
        if "swap" in claims:
            if partner is None:
                raise PreconditionError("swap symmetry needs a partner form")
            ok = True
            for i in range(len(form.M.factors)):
                for j in range(len(form.Mp.factors)):
                    if not partner.entries[j][i].equals(form.entries[i][j].involute()):
                        ok = False
                        bad.setdefault("swap", (i, j))
            res["swap"] = ok
        return AxiomReport(res, bad, True, form.ctx.qualifier())

    N, Np = form.N, form.Np
    p = form.p
    if claims is None:
        claims = ["bilinear"] + [c for c, f in (("galois", form.galois), ("alternating", form.alternating),
                                                  ("symmetric", form.symmetric or partner is not None)) if f]
    gens, gensp = _unit_vectors(N.rank), _unit_vectors(Np.rank)
    exhaustive = N.order_exponent + Np.order_exponent <= exhaustive_limit
    if exhaustive:
        pairs = [(list(x), list(y)) for x in N.elements() for y in Np.elements()]
    else:
        pairs = [(x, y) for x in gens for y in gensp]
    if "bilinear" in claims:
        ok = True
        for u, e in enumerate(N.exponents):
            for v, ep in enumerate(Np.exponents):
                b = form.matrix[u][v]
                if frac_mod1(b * p ** e, p) or frac_mod1(b * p ** ep, p):
                    ok = False
                    bad.setdefault("bilinear", (gens[u], gensp[v]))
        res["bilinear"] = ok
    if "galois" in claims:
        G, Gp = N.G(), Np.G()
        ok = True
        for x, y in pairs:
            if form.value(N.apply(G, x), Np.apply(Gp, y)) != form.value(x, y):
                ok = False
                bad.setdefault("galois", (x, y))
                break
        res["galois"] = ok
    if "symmetric" in claims:
        other = partner if partner is not None else form
        ok = True
        for x, y in pairs:
            if form.value(x, y) != other.value(y, x):
                ok = False
                bad.setdefault("symmetric", (x, y))
                break
        res["symmetric"] = ok
    if "alternating" in claims:
        ok = N.exponents == Np.exponents
        xs = [list(x) for x in N.elements()] if N.order_exponent <= exhaustive_limit else gens
        if ok:
            for x in xs:
                if form.value(x, x) != 0:
                    ok = False
                    bad.setdefault("alternating", (x, x))
                    break
        if ok:
            for u in range(N.rank):
                for v in range(N.rank):
                    if frac_mod1(form.matrix[u][v] + form.matrix[v][u], p):
                        ok = False
                        bad.setdefault("alternating", (gens[u], gens[v]))
        res["alternating"] = ok
    return AxiomReport(res, bad, exhaustive, N.ctx.qualifier(level=N.level))


# --- square order ------------------------------------------------------------------

@dataclass
class SquareOrderWitness:
    square: bool
    order_exponent: int
    half_exponents: List[int]
    H: List[List[int]]
    H_hat: List[List[int]]
    pairing_orders: List[int]

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def alternating_square_order(N: FiniteLevelModule, form: FiniteForm) -> SquareOrderWitness:
    """Symplectic reduction: N = (H_1 + Hhat_1) + ... with <x_k, y_k> of order |H_k|."""
    rep = check_axioms(form, claims=["bilinear", "alternating"], exhaustive_limit=0)
    if not rep.passed:
        raise PreconditionError("form is not alternating", counterexample=rep.counterexamples)
    nd = form_nondegeneracy(form)
    if not nd.nondegenerate:
        raise PreconditionError("form is degenerate", kernel=nd.left_kernel_generators)
    p = N.p
    a = max([N.ctx.a] + list(N.exponents))
    mod = p ** a
    B = form.scaled(a)

    def b(x, y):
        return sum(x[u] * B[u][v] * y[v] for u in range(len(x)) if x[u] for v in range(len(y)) if y[v]) % mod

    def val(z):
        if z == 0:
            return a
        k = 0
        while z % p == 0:
            z //= p
            k += 1
        return k

    current = submodule(p, a, N.exponents, _unit_vectors(N.rank))
    H, Hh, halves, orders = [], [], [], []
    while current.exponents:
        vecs = current.sect
        best = None
        for u in range(len(vecs)):
            for v in range(u + 1, len(vecs)):
                z = b(vecs[u], vecs[v])
                if z and (best is None or val(z) < best[0]):
                    best = (val(z), u, v)
        if best is None:
            raise PreconditionError("form is degenerate on a complement")
        k = a - best[0]
        x, y = vecs[best[1]], vecs[best[2]]
        H.append(x)
        Hh.append(y)
        halves.append(k)
        orders.append(k)
        # orthogonal complement of <x, y> inside the current subgroup
        rows = [[b(x, g) for g in vecs], [b(y, g) for g in vecs]]
        ker = map_kernel(p, a, current.exponents, [a, a], rows)
        amb = [[sum(c * g[i] for c, g in zip(kv, vecs)) % mod for i in range(N.rank)] for kv in ker.sect]
        nxt = submodule(p, a, N.exponents, amb) if amb else submodule(p, a, N.exponents, [])
        if sum(nxt.exponents) != sum(current.exponents) - 2 * k:
            raise PreconditionError("symplectic reduction failed to split off a hyperbolic plane")
        current = nxt
    return SquareOrderWitness(True, N.order_exponent, sorted(halves, reverse=True), H, Hh, orders)


def standard_symplectic(ctx: RingContext, exps_half: Sequence[int]) -> Tuple[FiniteLevelModule, FiniteForm]:
    """H x Hhat with the standard alternating form (blocks [[0, 1/p^e], [-1/p^e, 0]])."""
    exps = []
    for e in exps_half:
        exps += [e, e]
    N = FiniteLevelModule(ctx, 0, exps, check=False)
    r = len(exps)
    B = [[Fraction(0)] * r for _ in range(r)]
    for k, e in enumerate(exps_half):
        B[2 * k][2 * k + 1] = Fraction(1, ctx.p ** e)
        B[2 * k + 1][2 * k] = Fraction(-1, ctx.p ** e)
    return N, FiniteForm(N, N, B, alternating=True, galois=True)


def partitions(k: int, largest: Optional[int] = None):
    largest = k if largest is None else largest
    if k == 0:
        yield ()
        return
    for first in range(min(k, largest), 0, -1):
        for rest in partitions(k - first, first):
            yield (first,) + rest


@dataclass
class ExhaustiveResult:
    group: Tuple[int, ...]
    forms: int
    nondegenerate: int
    witnesses: int
    counterexamples: int
    route_mismatches: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _alternating_batch(exps: Sequence[int], p: int, start: int, stop: int):
    """Entries t_uv (u < v) of the forms with index in [start, stop), mixed radix."""
    r = len(exps)
    pairs = [(u, v) for u in range(r) for v in range(u + 1, r)]
    radices = [p ** min(exps[u], exps[v]) for u, v in pairs]
    idx = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((len(idx), len(pairs)), dtype=np.int64)
    for k, rad in enumerate(radices):
        digits[:, k] = idx % rad
        idx //= rad
    return pairs, digits


def _reduction_matrix(exps, p, pairs, digits):
    """c_uv = p^{e_v} b(e_u, e_v) mod p for all forms of the batch."""
    r = len(exps)
    K = digits.shape[0]
    C = np.zeros((K, r * r), dtype=np.int16)
    up, lo, up_k, lo_k = [], [], [], []
    for k, (u, v) in enumerate(pairs):
        m = min(exps[u], exps[v])
        if exps[v] == m:
            up.append(u * r + v)
            up_k.append(k)
        if exps[u] == m:
            lo.append(v * r + u)
            lo_k.append(k)
    d = (digits % p).astype(np.int16)
    if up:
        C[:, up] = d[:, up_k]
    if lo:
        C[:, lo] = (-d[:, lo_k]) % p
    return C.reshape(K, r, r)


def _det_mod_p(C: np.ndarray, p: int) -> np.ndarray:
    if C.shape[1] == 0:
        return np.ones(C.shape[0], dtype=np.int64)
    d = np.rint(np.linalg.det(C.astype(np.float64))).astype(np.int64)
    return d % p


def _matchings(idx: Sequence[int]):
    """Perfect matchings of idx with the Pfaffian sign."""
    if not idx:
        yield 1, []
        return
    first, rest = idx[0], idx[1:]
    for k, other in enumerate(rest):
        sign = -1 if k % 2 else 1
        for s, m in _matchings(rest[:k] + rest[k + 1:]):
            yield sign * s, [(first, other)] + m


def _pfaffian_mod_p(pairs, digits: np.ndarray, r: int, p: int) -> np.ndarray:
    """Pfaffian mod p of the alternating matrices with upper entries ``digits``."""
    K = digits.shape[0]
    if r % 2:
        return np.zeros(K, dtype=np.int64)
    col = {uv: k for k, uv in enumerate(pairs)}
    acc = np.zeros(K, dtype=np.int64)
    for sign, m in _matchings(list(range(r))):
        term = np.full(K, sign, dtype=np.int64)
        for uv in m:
            term = term * digits[:, col[uv]]
        acc += term
    return acc % p


def _symplectic_batch(Bm: np.ndarray, p: int):
    """Vectorised symplectic reduction over F_p; returns (ok, basis) per form.

    Basis vectors are stored as rows: V[k, t] is the t-th vector of form k.
    Entries stay reduced mod p, so small p and r fit in int16.
    """
    K, r, _ = Bm.shape
    dt = np.int16 if r * (p - 1) ** 2 * p < 2 ** 15 else np.int64
    V = np.broadcast_to(np.eye(r, dtype=dt), (K, r, r)).copy()
    if r % 2:
        return np.zeros(K, dtype=bool), V
    B = Bm.astype(dt)
    ok = np.ones(K, dtype=bool)
    inv = np.array([0] + [pow(x, -1, p) for x in range(1, p)], dtype=dt)
    ar = np.arange(K)

    def gram_row(s):
        u = np.matmul(V[:, s:s + 1], B) % p
        return np.matmul(V, u.transpose(0, 2, 1))[:, :, 0] % p

    for s in range(0, r, 2):
        rs = gram_row(s)
        nz = rs[:, s + 1:] != 0
        ok &= nz.any(axis=1)
        j = np.argmax(nz, axis=1) + s + 1
        scale = inv[rs[ar, j]]
        vj = V[ar, j].copy()
        V[ar, j] = V[:, s + 1]
        V[:, s + 1] = vj * scale[:, None] % p
        # the swap and rescaling act on row s of the Gram matrix directly
        rj = rs[ar, j].copy()
        rs[ar, j] = rs[:, s + 1]
        rs[:, s + 1] = rj * scale % p
        rs1 = gram_row(s + 1)
        if s + 2 < r:
            V[:, s + 2:] = (V[:, s + 2:] + rs1[:, s + 2:, None] * V[:, s, None, :]
                            - rs[:, s + 2:, None] * V[:, s + 1, None, :]) % p
    J = np.zeros((r, r), dtype=np.int32)
    for s in range(0, r, 2):
        J[s, s + 1] = 1
        J[s + 1, s] = p - 1
    W = np.matmul(V, B) % p
    G = np.matmul(W, V.transpose(0, 2, 1)) % p
    # V^T-Gram equal to J forces V invertible
    ok &= (G == J).all(axis=(1, 2))
    return ok, V


def exhaustive_square_search(p: int = 3, max_exponent: int = 6, chunk: int = 200_000,
                             python_limit: int = 3 ** 7) -> List[ExhaustiveResult]:
    """All alternating forms on all abelian p-groups of order <= p^max_exponent.

    Nondegeneracy is decided by det(c) mod p; every nondegenerate form gets a
    symplectic witness (vectorised over F_p for elementary groups, full
    reduction otherwise).  For small form spaces the kernel-based test is run
    as a second route.
    """
    ctx = RingContext(p, max(max_exponent, 1), 4)
    out = []
    for k in range(1, max_exponent + 1):
        for exps in partitions(k):
            r = len(exps)
            total = 1
            for u in range(r):
                for v in range(u + 1, r):
                    total *= p ** min(exps[u], exps[v])
            nondeg = wit = bad = mism = 0
            elementary = all(e == 1 for e in exps)
            for start in range(0, total, chunk):
                stop = min(total, start + chunk)
                pairs, digits = _alternating_batch(exps, p, start, stop)
                if elementary:
                    nd = _pfaffian_mod_p(pairs, digits, r, p) != 0
                else:
                    C = _reduction_matrix(exps, p, pairs, digits)
                    nd = _det_mod_p(C, p) != 0
                nondeg += int(nd.sum())
                if k % 2 and nd.any():
                    bad += int(nd.sum())
                if elementary:
                    # a witness exists exactly for the nondegenerate forms: reduce those,
                    # and spot-check that reduction fails on a sample of the rest
                    C = _reduction_matrix(exps, p, pairs, digits)
                    ok, _ = _symplectic_batch(C[nd], p)
                    wit += int(ok.sum())
                    mism += int((~ok).sum())
                    rest = np.flatnonzero(~nd)[:1000]
                    if rest.size:
                        mism += int(_symplectic_batch(C[rest], p)[0].sum())
                    continue
                need_python = total <= python_limit
                for row in range(digits.shape[0]):
                    if not (nd[row] or need_python):
                        continue
                    N = FiniteLevelModule(ctx, 0, exps, check=False)
                    Bf = [[Fraction(0)] * r for _ in range(r)]
                    for t, (u, v) in enumerate(pairs):
                        x = Fraction(int(digits[row, t]), p ** min(exps[u], exps[v]))
                        Bf[u][v] = frac_mod1(x, p)
                        Bf[v][u] = frac_mod1(-x, p)
                    form = FiniteForm(N, N, Bf, alternating=True)
                    if need_python and form_nondegeneracy(form).nondegenerate != bool(nd[row]):
                        mism += 1
                    if nd[row]:
                        w = alternating_square_order(N, form)
                        if w.square and sorted(w.half_exponents * 2) == sorted(exps):
                            wit += 1
                        else:
                            bad += 1
            out.append(ExhaustiveResult(tuple(exps), total, nondeg, wit, bad, mism))
    return out


# --- functional equation ----------------------------------------------------------

@dataclass
class FunctionalEquation:
    holds: bool
    epsilon: Optional[int]
    precision: int
    qualifier: dict

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def functional_equation_check(f) -> FunctionalEquation:
    """Is (iota f) = (f)?  If so, the sign eps with iota(f) = eps * f * (unit with constant term 1)."""
    ctx = f.ctx
    p, a, m = ctx.p, ctx.a, ctx.m
    if f.is_zero():
        raise PreconditionError("f is zero at precision")
    if isinstance(f, PSeries2):
        g = involution(f)
        mod = ctx.modulus
        if g.to_list() == f.to_list():
            return FunctionalEquation(True, 1, a, ctx.qualifier())
        if (-g).to_list() == f.to_list():
            return FunctionalEquation(True, -1, a, ctx.qualifier())
        raise IndeterminateAtPrecision("two-variable check only decides iota(f) = +f or -f")
    wf = weierstrass_prepare(f)
    g = involution(f)
    wg = weierstrass_prepare(g)
    lam = wf.lam
    b = a - wf.mu if lam == 0 else min(a - wf.mu, m // lam)
    if b < 1:
        raise IndeterminateAtPrecision("no precision left to compare")
    q = ctx.qualifier(precision_effective=b)
    if (wf.mu, wf.lam) != (wg.mu, wg.lam):
        return FunctionalEquation(False, None, b, q)
    mod = p ** b
    if any((x - y) % mod for x, y in zip(wf.distinguished, wg.distinguished)):
        return FunctionalEquation(False, None, b, q)
    ratio = wg.unit.coeffs[0] * pow(wf.unit.coeffs[0], -1, ctx.modulus) % mod
    if ratio == 1 % mod:
        eps = 1
    elif ratio == (-1) % mod:
        eps = -1
    else:
        eps = None
    return FunctionalEquation(True, eps, b, q)

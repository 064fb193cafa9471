"""The Iwasawa algebra at working precision.

Elements of Z_p[[T]] (and Z_p[[T1, T2]]) are stored as coefficient arrays
mod ``(p^a, T^m)``.  Operations that need information past ``T^m`` (reduction
modulo a distinguished polynomial, Weierstrass preparation) treat a series as
the polynomial its stored coefficients define; for polynomial inputs of
degree < m this is exact.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

from . import poly
from .errors import (
    ContextMismatch,
    IndeterminateAtPrecision,
    PrecisionError,
    TruncationTooShort,
)
from .padic import PAdicScalar, RingContext, balanced, smith_normal_form, valuation_int


def _coerce(ctx: RingContext, coeffs: Sequence[int], length: int) -> Tuple[int, ...]:
    mod = ctx.modulus
    c = [int(x) % mod for x in coeffs][:length]
    return tuple(c + [0] * (length - len(c)))


@dataclass(frozen=True)
class PSeries1:
    """Element of (Z/p^a)[[T]]/(T^m); ``coeffs[i]`` multiplies T^i."""

    ctx: RingContext
    coeffs: Tuple[int, ...]

    def __init__(self, ctx: RingContext, coeffs: Iterable[int] = ()):
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "coeffs", _coerce(ctx, list(coeffs), ctx.m))

    @classmethod
    def constant(cls, ctx, c):
        return cls(ctx, [c])

    @classmethod
    def T(cls, ctx):
        return cls(ctx, [0, 1])

    @property
    def scalars(self) -> List[PAdicScalar]:
        return [PAdicScalar(self.ctx, c) for c in self.coeffs]

    def poly(self) -> List[int]:
        return poly.trim(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def degree(self) -> int:
        return len(self.poly()) - 1

    def _other(self, other):
        if isinstance(other, int):
            return PSeries1.constant(self.ctx, other)
        if not isinstance(other, PSeries1):
            return NotImplemented
        if other.ctx != self.ctx:
            raise ContextMismatch(f"{self.ctx} vs {other.ctx}")
        return other

    def __add__(self, other):
        other = self._other(other)
        return PSeries1(self.ctx, poly.add(self.coeffs, other.coeffs, self.ctx.modulus))

    def __sub__(self, other):
        other = self._other(other)
        return PSeries1(self.ctx, poly.sub(self.coeffs, other.coeffs, self.ctx.modulus))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        other = self._other(other)
        return PSeries1(self.ctx, poly.mul(self.coeffs, other.coeffs, self.ctx.modulus, self.ctx.m))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return PSeries1(self.ctx, [-c for c in self.coeffs])

    def __pow__(self, e: int):
        return PSeries1(self.ctx, poly.power(self.coeffs, e, self.ctx.modulus, self.ctx.m))

    def to_list(self) -> List[int]:
        return list(self.coeffs)


@dataclass(frozen=True)
class PSeries2:
    """Element of (Z/p^a)[[T1,T2]]/(T1^m, T2^m); ``coeffs[i][j]`` multiplies T1^i T2^j."""

    ctx: RingContext
    coeffs: Tuple[Tuple[int, ...], ...]

    def __init__(self, ctx: RingContext, coeffs: Iterable[Iterable[int]] = ()):
        if ctx.vars != 2:
            ctx = ctx.with_vars(2)
        rows = [list(r) for r in coeffs][: ctx.m]
        rows += [[]] * (ctx.m - len(rows))
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "coeffs", tuple(_coerce(ctx, r, ctx.m) for r in rows))

    def is_zero(self) -> bool:
        return not any(any(r) for r in self.coeffs)

    def _other(self, other):
        if isinstance(other, int):
            return PSeries2(self.ctx, [[other]])
        if not isinstance(other, PSeries2):
            return NotImplemented
        if other.ctx != self.ctx:
            raise ContextMismatch(f"{self.ctx} vs {other.ctx}")
        return other

    def __add__(self, other):
        other = self._other(other)
        mod = self.ctx.modulus
        return PSeries2(self.ctx, [[(x + y) % mod for x, y in zip(r, s)] for r, s in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        other = self._other(other)
        mod = self.ctx.modulus
        return PSeries2(self.ctx, [[(x - y) % mod for x, y in zip(r, s)] for r, s in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return PSeries2(self.ctx, [[-x for x in r] for r in self.coeffs])

    def __mul__(self, other):
        other = self._other(other)
        m, mod = self.ctx.m, self.ctx.modulus
        out = [[0] * m for _ in range(m)]
        for i, r in enumerate(self.coeffs):
            for k, s in enumerate(other.coeffs[: m - i]):
                if not any(s):
                    continue
                prod = poly.mul(r, s, mod, m)
                row = out[i + k]
                for j, x in enumerate(prod):
                    row[j] = (row[j] + x) % mod
        return PSeries2(self.ctx, out)

    __radd__ = __add__
    __rmul__ = __mul__

    def to_list(self) -> List[List[int]]:
        return [list(r) for r in self.coeffs]

    def specialize_T2(self, value: int) -> List[int]:
        """Coefficients (in T1) of F(T1, value) mod p^a, as a polynomial."""
        mod = self.ctx.modulus
        pw = [pow(value, j, mod) for j in range(self.ctx.m)]
        return [sum(c * w for c, w in zip(row, pw)) % mod for row in self.coeffs]


def series_arith(f, g, op: str):
    if type(f) is not type(g):
        raise ContextMismatch("mixing one- and two-variable series")
    if f.ctx != g.ctx:
        raise ContextMismatch(f"{f.ctx} vs {g.ctx}")
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown op {op!r}")


# --- Weierstrass preparation ------------------------------------------------

@dataclass(frozen=True)
class WeierstrassData:
    """f = p^mu * unit * distinguished, valid mod (p^(a - mu), T^m).

    ``distinguished`` is a monic coefficient list of degree ``lam``; its
    coefficients and the unit's are residues mod ``p^precision``.
    """

    ctx: RingContext
    mu: int
    lam: int
    distinguished: Tuple[int, ...]
    unit: PSeries1
    precision: int

    def reconstruct(self) -> PSeries1:
        mod = self.ctx.modulus
        prod = poly.mul(self.unit.coeffs, self.distinguished, mod, self.ctx.m)
        return PSeries1(self.ctx, [x * self.ctx.p ** self.mu for x in prod])

    def canonical(self) -> PSeries1:
        """p^mu times the distinguished polynomial (the unit stripped)."""
        return PSeries1(self.ctx, [x * self.ctx.p ** self.mu for x in self.distinguished])


def _divide_by_general(g: List[int], f: List[int], lam: int, mod: int, steps: int, K: int):
    """Weierstrass division g = q f + r with deg r < lam, f having first unit at index lam.

    Works mod T^K; the remainder is exact once K is large relative to lam * steps.
    """
    B = f[:lam]
    V = f[lam:]
    Vinv = poly.inverse_series(V, mod, K)
    h = list(g)
    q: List[int] = []
    r: List[int] = [0] * lam
    for _ in range(steps + 1):
        if not any(h):
            break
        H, R = h[lam:], h[:lam]
        r = poly.add(r, R, mod)
        qk = poly.mul(H, Vinv, mod, K)
        q = poly.add(q, qk, mod)
        h = [(-x) % mod for x in poly.mul(qk, B, mod, K)]
    else:
        if any(h):
            raise PrecisionError("Weierstrass division did not converge within the iteration cap")
    return q, (r + [0] * lam)[:lam]


def weierstrass_prepare(f: PSeries1) -> WeierstrassData:
    ctx = f.ctx
    p, a = ctx.p, ctx.a
    if f.is_zero():
        raise IndeterminateAtPrecision("series is zero at precision; Weierstrass data indeterminate")
    mu = min(valuation_int(c, p, a) for c in f.coeffs if c)
    ap = a - mu
    modp = p ** ap
    fp = [(c // p ** mu) % modp for c in f.coeffs]
    lam = next(i for i, c in enumerate(fp) if c % p)
    if lam >= ctx.m:
        raise TruncationTooShort(f"lambda >= m = {ctx.m}")
    fpoly = poly.trim(fp)
    if lam == 0:
        P = [1]
        U = fpoly
    else:
        K = len(fpoly) + lam * (ap + 2) + 1
        Tl = [0] * lam + [1]
        _, r = _divide_by_general(Tl, fpoly, lam, modp, ap, K)
        P = [(-x) % modp for x in r] + [1]
        U, rem = poly.divmod_monic(fpoly, P, modp)
        if any(rem):
            raise PrecisionError("distinguished factor does not divide the series at precision")
    return WeierstrassData(ctx, mu, lam, tuple(P), PSeries1(ctx, U), ap)


def mu_lambda(f: PSeries1) -> Tuple[int, int]:
    w = weierstrass_prepare(f)
    return w.mu, w.lam


def canonical_char(f: PSeries1) -> PSeries1:
    return weierstrass_prepare(f).canonical()


def divides(f: PSeries1, g: PSeries1, precision: Optional[int] = None) -> bool:
    """Does f divide g in Z_p[[T]] (tested by Weierstrass division at precision)?"""
    w = weierstrass_prepare(f)
    p = f.ctx.p
    b = f.ctx.a if precision is None else precision
    if w.lam:
        # the unknown tail T^m g' is p^{m // lam}-divisible modulo the distinguished factor
        b = min(b, f.ctx.m // w.lam)
    mod = p ** b
    q, r = poly.divmod_monic([x % mod for x in g.poly()], list(w.distinguished), mod)
    if any(x % p ** min(b, w.precision) for x in r):
        return False
    return all(x % p ** min(w.mu, b) == 0 for x in q)


def associates(f: PSeries1, g: PSeries1) -> bool:
    """Ideal equality (f) = (g): same mu and same distinguished polynomial."""
    wf, wg = weierstrass_prepare(f), weierstrass_prepare(g)
    if (wf.mu, wf.lam) != (wg.mu, wg.lam):
        return False
    b = min(wf.precision, wg.precision)
    if wf.lam:
        b = min(b, f.ctx.m // wf.lam)
    mod = f.ctx.p ** b
    return all((x - y) % mod == 0 for x, y in zip(wf.distinguished, wg.distinguished))


# --- substitutions ------------------------------------------------------------

def _iota_T(mod: int, m: int) -> List[int]:
    s = poly.inverse_series([1, 1], mod, m)
    s[0] = (s[0] - 1) % mod
    return s


def _compose_axis0(rows: List[List[int]], s: List[int], mod: int, m: int) -> List[List[int]]:
    # rows[i][j]: coefficient of X^i Y^j; substitute X -> s(X)
    cols = [list(c) for c in zip(*rows)]
    new_cols = [(poly.compose(c, s, mod, m) + [0] * m)[:m] for c in cols]
    return [list(r) for r in zip(*new_cols)]


def involution(f):
    """f with T -> (1+T)^{-1} - 1 (in each variable for two-variable series)."""
    mod, m = f.ctx.modulus, f.ctx.m
    s = _iota_T(mod, m)
    if isinstance(f, PSeries1):
        return PSeries1(f.ctx, poly.compose(f.coeffs, s, mod, m))
    rows = _compose_axis0(f.to_list(), s, mod, m)
    rows = [(poly.compose(r, s, mod, m) + [0] * m)[:m] for r in rows]
    return PSeries2(f.ctx, rows)


@dataclass(frozen=True)
class Character:
    """Character of Gamma sending the generator to ``u`` (u = 1 mod p)."""

    u: PAdicScalar

    def __post_init__(self):
        p = self.u.ctx.p
        if self.u.residue % p != 1:
            raise ValueError("character value must be congruent to 1 mod p")

    @classmethod
    def of(cls, ctx: RingContext, u: int) -> "Character":
        return cls(PAdicScalar(ctx, u))

    def power(self, k: int) -> int:
        mod = self.u.ctx.modulus
        if k >= 0:
            return pow(self.u.residue, k, mod)
        return pow(pow(self.u.residue, -1, mod), -k, mod)


def twist(f: PSeries1, chi: Character, k: int) -> PSeries1:
    """f(u^k (1+T) - 1)."""
    if k == 0:
        return f
    ctx = f.ctx
    mod = ctx.modulus
    c = chi.power(k)
    s = [(c - 1) % mod, c]
    return PSeries1(ctx, poly.compose(f.poly(), s, mod, ctx.m))


def omega(ctx: RingContext, n: int) -> PSeries1:
    N = ctx.p ** n
    if ctx.m <= N:
        raise TruncationTooShort(f"omega_{n} needs m > p^n = {N} (m = {ctx.m})")
    return PSeries1(ctx, poly.omega(ctx.p, n, ctx.modulus))


# --- finiteness of Lambda/(f, omega_n) ----------------------------------------

def quotient_exponents(fpoly: Sequence[int], p: int, n: int, a: int) -> List[int]:
    """Invariant-factor exponents of (Z/p^a)[T]/(omega_n, f)."""
    mod = p ** a
    w = poly.omega(p, n, mod)
    M = poly.mult_matrix([x % mod for x in fpoly], w, mod)
    return smith_normal_form(M, p, a, transforms=False).cokernel_exponents()


def _check_level(ctx: RingContext, n: int):
    if ctx.m <= ctx.p ** n:
        raise TruncationTooShort(f"level {n} needs m > p^n = {ctx.p ** n} (m = {ctx.m})")


def cotorsion_test(f: PSeries1, n: int) -> bool:
    """Is Lambda/(f, omega_n) finite?  Decided by order stabilisation from precision a to a+1."""
    weierstrass_prepare(f)
    ctx = f.ctx
    _check_level(ctx, n)
    lifted = [balanced(x, ctx.modulus) for x in f.poly()]
    e_a = sum(quotient_exponents(lifted, ctx.p, n, ctx.a))
    e_b = sum(quotient_exponents(lifted, ctx.p, n, ctx.a + 1))
    return e_a == e_b


def quotient_order_exponent(f: PSeries1, n: int) -> Optional[int]:
    """log_p |Lambda/(f, omega_n)|, or None when infinite at precision."""
    if not cotorsion_test(f, n):
        return None
    return sum(quotient_exponents(f.poly(), f.ctx.p, n, f.ctx.a))


@dataclass(frozen=True)
class Admissibility:
    """Outcome of an admissibility search; verdicts hold up to ``qualifier``."""

    value: Optional[int]
    rejected: Tuple[int, ...]
    qualifier: dict = field(default_factory=dict)

    @property
    def exhausted(self) -> bool:
        return self.value is None


def admissible_twist_search(H: PSeries1, chi: Character, k_range: Iterable[int], n_max: int) -> Admissibility:
    if H.is_zero():
        raise IndeterminateAtPrecision("H is zero at precision")
    _check_level(H.ctx, n_max)
    rejected = []
    for k in k_range:
        Hk = twist(H, chi, k)
        if all(cotorsion_test(Hk, n) for n in range(n_max + 1)):
            return Admissibility(k, tuple(rejected), H.ctx.qualifier(n_max=n_max))
        rejected.append(k)
    return Admissibility(None, tuple(rejected), H.ctx.qualifier(n_max=n_max))


def line_specialization(F: PSeries2, b: int, probe: int) -> PSeries1:
    """One-variable series Y -> F((1+t)^b (1+Y) - 1, t) at the probe point t = p*probe."""
    ctx1 = F.ctx.with_vars(1)
    t = F.ctx.p * probe
    h = PSeries1(ctx1, F.specialize_T2(t))
    u = pow(1 + t, b, ctx1.modulus) if b >= 0 else pow(pow(1 + t, -1, ctx1.modulus), -b, ctx1.modulus)
    return twist(h, Character.of(ctx1, u), 1)


def admissible_line_search(F: PSeries2, b_range: Iterable[int], n_max: int, probes: Sequence[int] = (1, 2, 3)) -> Admissibility:
    """Smallest b with F(zeta(1+T2)^b - 1, T2) nonzero for every p^n-th root of unity, n <= n_max.

    Nonvanishing of the T2-series is witnessed by finiteness of the one-variable
    quotient at some probe point T2 = p*c.
    """
    if F.is_zero():
        raise IndeterminateAtPrecision("F is zero at precision")
    _check_level(F.ctx, n_max)
    rejected = []
    for b in b_range:
        ok = True
        for n in range(n_max + 1):
            witnessed = False
            for c in probes:
                g = line_specialization(F, b, c)
                if not g.is_zero() and cotorsion_test(g, n):
                    witnessed = True
                    break
            if not witnessed:
                ok = False
                break
        if ok:
            return Admissibility(b, tuple(rejected), F.ctx.qualifier(n_max=n_max, probes=list(probes)))
        rejected.append(b)
    return Admissibility(None, tuple(rejected), F.ctx.qualifier(n_max=n_max, probes=list(probes)))

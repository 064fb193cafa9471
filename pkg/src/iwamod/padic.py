"""Exact arithmetic over Z/p^a and Smith normal form of matrices over it.

Matrices are plain lists of rows of Python ints, always reduced into
``[0, p**a)``.  Every routine takes ``(p, a)`` explicitly so callers can
recompute at a higher precision without building a new context.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .errors import ContextMismatch, NotInvertible

Matrix = List[List[int]]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


@dataclass(frozen=True)
class RingContext:
    """Working precision: coefficients mod ``p**a``, series mod ``T**m``."""

    p: int
    a: int
    m: int = 16
    vars: int = 1

    def __post_init__(self):
        if not _is_prime(self.p) or self.p == 2:
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.a < 1:
            raise ValueError("precision a must be >= 1")
        if self.m < 1:
            raise ValueError("truncation m must be >= 1")
        if self.vars not in (1, 2):
            raise ValueError("vars must be 1 or 2")

    @property
    def modulus(self) -> int:
        return self.p ** self.a

    def with_precision(self, a: int) -> "RingContext":
        return RingContext(self.p, a, self.m, self.vars)

    def with_vars(self, vars: int) -> "RingContext":
        return RingContext(self.p, self.a, self.m, vars)

    def scalar(self, value: int) -> "PAdicScalar":
        return PAdicScalar(self, value)

    def qualifier(self, **extra) -> dict:
        q = {"p": self.p, "a": self.a, "m": self.m}
        q.update(extra)
        return q


@dataclass(frozen=True)
class AtLeast:
    """Valuation marker for zero at precision: the true valuation is >= bound."""

    bound: int

    def __str__(self):
        return f">={self.bound}"


def balanced(x: int, mod: int) -> int:
    """Lift of a residue mod ``mod`` to the interval (-mod/2, mod/2]."""
    x %= mod
    return x - mod if x > mod // 2 else x


def valuation_int(x: int, p: int, a: int) -> int:
    """Valuation of ``x`` mod p^a, saturating at ``a`` (used internally)."""
    x %= p ** a
    if x == 0:
        return a
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@dataclass(frozen=True)
class PAdicScalar:
    ctx: RingContext
    residue: int

    def __post_init__(self):
        object.__setattr__(self, "residue", self.residue % self.ctx.modulus)

    def _check(self, other):
        if isinstance(other, int):
            return PAdicScalar(self.ctx, other)
        if not isinstance(other, PAdicScalar):
            return NotImplemented
        if other.ctx != self.ctx:
            raise ContextMismatch(f"{self.ctx} vs {other.ctx}")
        return other

    def __add__(self, other):
        other = self._check(other)
        return PAdicScalar(self.ctx, self.residue + other.residue)

    def __sub__(self, other):
        other = self._check(other)
        return PAdicScalar(self.ctx, self.residue - other.residue)

    def __mul__(self, other):
        other = self._check(other)
        return PAdicScalar(self.ctx, self.residue * other.residue)

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return PAdicScalar(self.ctx, -self.residue)

    def valuation(self):
        if self.residue == 0:
            return AtLeast(self.ctx.a)
        return valuation_int(self.residue, self.ctx.p, self.ctx.a)

    def is_unit(self) -> bool:
        return self.residue % self.ctx.p != 0

    def __int__(self):
        return self.residue


def scalar_arith(x: PAdicScalar, y: PAdicScalar, op: str) -> PAdicScalar:
    if x.ctx != y.ctx:
        raise ContextMismatch(f"{x.ctx} vs {y.ctx}")
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    raise ValueError(f"unknown op {op!r}")


def unit_inverse(x: PAdicScalar) -> PAdicScalar:
    if not x.is_unit():
        raise NotInvertible(f"{x.residue} is not invertible at this precision (p={x.ctx.p}, a={x.ctx.a})")
    return PAdicScalar(x.ctx, pow(x.residue, -1, x.ctx.modulus))


# --- matrices -------------------------------------------------------------

def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(r: int, c: int) -> Matrix:
    return [[0] * c for _ in range(r)]


def mat_mul(A: Matrix, B: Matrix, mod: int) -> Matrix:
    if not A or not B:
        return [[0] * (len(B[0]) if B else 0) for _ in A]
    Bt = list(zip(*B))
    return [[sum(x * y for x, y in zip(row, col)) % mod for col in Bt] for row in A]


def mat_vec(A: Matrix, v: Sequence[int], mod: int) -> List[int]:
    return [sum(x * y for x, y in zip(row, v)) % mod for row in A]


def mat_pow(A: Matrix, e: int, mod: int) -> Matrix:
    R = identity(len(A))
    B = [row[:] for row in A]
    while e:
        if e & 1:
            R = mat_mul(R, B, mod)
        B = mat_mul(B, B, mod)
        e >>= 1
    return R


def transpose(A: Matrix) -> Matrix:
    return [list(r) for r in zip(*A)]


def hstack(A: Matrix, B: Matrix) -> Matrix:
    return [ra + rb for ra, rb in zip(A, B)]


@dataclass
class SNFResult:
    """``left @ A @ right == diag`` over Z/p^a.

    ``exponents[k]`` is the valuation of the k-th diagonal entry (``a`` for
    zero).  The diagonal is normalised to exact powers of p and is ascending,
    so each entry divides the next.
    """

    p: int
    a: int
    shape: tuple
    exponents: List[int]
    left: Matrix
    right: Matrix
    left_inv: Matrix = field(default_factory=list)
    right_inv: Matrix = field(default_factory=list)

    @property
    def diagonal(self) -> List[int]:
        mod = self.p ** self.a
        return [self.p ** e % mod for e in self.exponents]

    @property
    def orders(self) -> List[int]:
        return [self.p ** e for e in self.exponents]

    def cokernel_exponents(self) -> List[int]:
        """Invariant-factor exponents of coker(A) on (Z/p^a)^rows, trivial ones dropped."""
        rows = self.shape[0]
        ex = list(self.exponents) + [self.a] * (rows - len(self.exponents))
        return [e for e in ex if e > 0]

    def cokernel_order_exponent(self) -> int:
        return sum(self.cokernel_exponents())


def smith_normal_form(A: Matrix, p: int, a: int, transforms: bool = True) -> SNFResult:
    """Smith normal form over the local ring Z/p^a.

    Pivot = entry of least valuation in the remaining block, ties broken by
    row index then column index.
    """
    mod = p ** a
    rows = len(A)
    cols = len(A[0]) if rows else 0
    S = [[x % mod for x in row] for row in A]
    L = identity(rows) if transforms else None
    Li = identity(rows) if transforms else None
    R = identity(cols) if transforms else None
    Ri = identity(cols) if transforms else None
    exps: List[int] = []
    pw = [p ** k for k in range(a + 1)]

    for k in range(min(rows, cols)):
        best_v, bi, bj = a, -1, -1
        for i in range(k, rows):
            Si = S[i]
            for j in range(k, cols):
                x = Si[j]
                if x == 0:
                    continue
                v = 0
                while x % p == 0:
                    x //= p
                    v += 1
                if v < best_v:
                    best_v, bi, bj = v, i, j
                    if v == 0:
                        break
            if best_v == 0:
                break
        if bi < 0:
            exps.extend([a] * (min(rows, cols) - k))
            break
        if bi != k:
            S[k], S[bi] = S[bi], S[k]
            if transforms:
                L[k], L[bi] = L[bi], L[k]
                for row in Li:
                    row[k], row[bi] = row[bi], row[k]
        if bj != k:
            for row in S:
                row[k], row[bj] = row[bj], row[k]
            if transforms:
                for row in R:
                    row[k], row[bj] = row[bj], row[k]
                Ri[k], Ri[bj] = Ri[bj], Ri[k]
        pv = pw[best_v]
        unit = (S[k][k] // pv) % mod
        if unit != 1:
            inv = pow(unit, -1, mod)
            S[k] = [x * inv % mod for x in S[k]]
            if transforms:
                L[k] = [x * inv % mod for x in L[k]]
                for row in Li:
                    row[k] = row[k] * unit % mod
        Sk = S[k]
        for i in range(k + 1, rows):
            c = S[i][k]
            if c:
                c //= pv
                Si = S[i]
                for j in range(k, cols):
                    if Sk[j]:
                        Si[j] = (Si[j] - c * Sk[j]) % mod
                if transforms:
                    Lk, Lii = L[k], L[i]
                    L[i] = [(x - c * y) % mod for x, y in zip(Lii, Lk)]
                    for row in Li:
                        row[k] = (row[k] + c * row[i]) % mod
        for j in range(k + 1, cols):
            c = Sk[j]
            if c:
                c //= pv
                Sk[j] = 0
                if transforms:
                    for row in R:
                        row[j] = (row[j] - c * row[k]) % mod
                    Rj, Rk = Ri[j], Ri[k]
                    Ri[k] = [(x + c * y) % mod for x, y in zip(Rk, Rj)]
        exps.append(best_v)

    return SNFResult(p, a, (rows, cols), exps, L or [], R or [], Li or [], Ri or [])


def cokernel_exponents(A: Matrix, p: int, a: int) -> List[int]:
    return smith_normal_form(A, p, a, transforms=False).cokernel_exponents()


def kernel_basis(B: Matrix, p: int, a: int, snf: Optional[SNFResult] = None) -> List[List[int]]:
    """Generators (as vectors) of {z : B z = 0} in (Z/p^a)^cols."""
    mod = p ** a
    rows = len(B)
    cols = len(B[0]) if rows else 0
    if rows == 0:
        return [[int(i == j) for i in range(cols)] for j in range(cols)]
    snf = snf or smith_normal_form(B, p, a)
    gens = []
    for k in range(cols):
        scale = p ** (a - snf.exponents[k]) if k < len(snf.exponents) else 1
        if scale % mod == 0:
            continue
        gens.append([row[k] * scale % mod for row in snf.right])
    return gens


def solve(B: Matrix, v: Sequence[int], p: int, a: int, snf: Optional[SNFResult] = None) -> Optional[List[int]]:
    """One solution z of B z = v over Z/p^a, or None."""
    mod = p ** a
    rows = len(B)
    cols = len(B[0]) if rows else 0
    snf = snf or smith_normal_form(B, p, a)
    Lv = mat_vec(snf.left, v, mod)
    w = [0] * cols
    for k in range(rows):
        if k < len(snf.exponents):
            e = snf.exponents[k]
            if e >= a:
                if Lv[k]:
                    return None
                continue
            if Lv[k] % (p ** e):
                return None
            w[k] = Lv[k] // (p ** e)
        elif Lv[k]:
            return None
    return mat_vec(snf.right, w, mod)


def rank_mod_p(A: Matrix, p: int) -> int:
    if not A or not A[0]:
        return 0
    ex = smith_normal_form(A, p, 1, transforms=False).exponents
    return sum(1 for e in ex if e == 0)

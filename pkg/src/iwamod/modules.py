"""Finitely generated torsion Lambda-modules and their finite-level shadows."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from . import poly
from .errors import IndeterminateAtPrecision, PreconditionError, PrecisionError, TruncationTooShort
from .finite import FiniteLevelModule, Presentation, quotient
from .padic import Matrix, RingContext, balanced, mat_mul
from .series import PSeries1, PSeries2, involution, weierstrass_prepare


@dataclass(frozen=True)
class ElementaryModule:
    """⊕ Lambda/(f_i); the empty factor list is the zero module."""

    ctx: RingContext
    factors: Tuple[Union[PSeries1, PSeries2], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        for f in self.factors:
            if f.is_zero():
                raise PreconditionError("factor is zero at precision")
            if isinstance(f, PSeries1):
                weierstrass_prepare(f)

    @property
    def two_variable(self) -> bool:
        return any(isinstance(f, PSeries2) for f in self.factors)

    def presentation(self) -> "SquarePresentedModule":
        d = len(self.factors)
        zero = PSeries1(self.ctx, [])
        A = [[self.factors[i] if i == j else zero for j in range(d)] for i in range(d)]
        return SquarePresentedModule(self.ctx, A)


@dataclass(frozen=True)
class SquarePresentedModule:
    """coker(A : Lambda^d -> Lambda^d), A acting on column vectors."""

    ctx: RingContext
    matrix: Tuple[Tuple[PSeries1, ...], ...]

    def __init__(self, ctx: RingContext, matrix: Sequence[Sequence[PSeries1]], check: bool = True):
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "matrix", tuple(tuple(r) for r in matrix))
        if any(len(r) != len(self.matrix) for r in self.matrix):
            raise PreconditionError("presentation matrix must be square")
        if check and self.matrix and determinant(self.matrix).is_zero():
            raise PreconditionError("det(A) is zero at precision: not torsion")

    @property
    def size(self) -> int:
        return len(self.matrix)

    def transpose(self) -> "SquarePresentedModule":
        return SquarePresentedModule(self.ctx, [list(r) for r in zip(*self.matrix)], check=False)


@dataclass(frozen=True)
class DottedModule:
    """The base module with gamma acting through gamma^{-1}."""

    base: object

    @property
    def ctx(self):
        return self.base.ctx


LambdaModule = Union[ElementaryModule, SquarePresentedModule, DottedModule, FiniteLevelModule]


def dot(M):
    if isinstance(M, DottedModule):
        return M.base
    return DottedModule(M)


def determinant(A: Sequence[Sequence[PSeries1]]) -> PSeries1:
    d = len(A)
    if d == 1:
        return A[0][0]
    if d == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    total = None
    for j in range(d):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        term = A[0][j] * determinant(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


# --- coinvariants -------------------------------------------------------------

@dataclass
class CoinvariantLevel:
    """M/omega_n M at precision a, with the coordinate data needed for transitions.

    The ambient space is (Z/p^a)^{blocks * p^n} (polynomials mod omega_n, one
    block per generator) or, for finite inputs, the module's own coordinates.
    """

    level: int
    a: int
    module: FiniteLevelModule
    presentation: Presentation
    gamma_ambient: Matrix
    blocks: Tuple[int, ...]
    polynomial: bool = True
    parts: Tuple[int, ...] = ()

    def lift_from_lower(self, lower: "CoinvariantLevel", v: Sequence[int]) -> List[int]:
        if not self.polynomial:
            return list(v)
        out: List[int] = []
        pos = 0
        for bl, bu in zip(lower.blocks, self.blocks):
            out += list(v[pos:pos + bl]) + [0] * (bu - bl)
            pos += bl
        return out

    @property
    def saturated(self) -> bool:
        return any(e >= self.a for e in self.module.exponents)


def _check_level(ctx: RingContext, n: int):
    if ctx.m <= ctx.p ** n:
        raise TruncationTooShort(f"level {n} needs m > p^n = {ctx.p ** n} (m = {ctx.m})")


def _gamma_poly_matrix(p: int, n: int, mod: int, inverse: bool) -> Matrix:
    w = poly.omega(p, n, mod)
    N = p ** n
    g = [1, 1] if not inverse else poly.reduce_mod(poly.power([1, 1], N - 1, mod), w, mod)
    return poly.mult_matrix(g, w, mod)


def _block_diag(blocks: Sequence[Matrix]) -> Matrix:
    size = sum(len(b) for b in blocks)
    out = [[0] * size for _ in range(size)]
    pos = 0
    for b in blocks:
        for i, row in enumerate(b):
            out[pos + i][pos:pos + len(row)] = row
        pos += len(b)
    return out


def _square_level(M: SquarePresentedModule, n: int, a: int, dotted: bool) -> CoinvariantLevel:
    ctx = M.ctx
    p = ctx.p
    mod = p ** a
    N = p ** n
    d = M.size
    w = poly.omega(p, n, mod)
    rel_cols: List[List[int]] = []
    blocks = [[poly.mult_matrix([balanced(x, ctx.modulus) % mod for x in M.matrix[i][j].poly()], w, mod) for j in range(d)] for i in range(d)]
    for j in range(d):
        for t in range(N):
            rel_cols.append([blocks[i][j][r][t] for i in range(d) for r in range(N)])
    pres = quotient(p, a, [a] * (d * N), rel_cols)
    gamma = _block_diag([_gamma_poly_matrix(p, n, mod, dotted)] * d)
    G = pres.induced(gamma) if pres.exponents else []
    mod_ctx = ctx.with_precision(a) if a != ctx.a else ctx
    fm = FiniteLevelModule(mod_ctx, n, pres.exponents, G, check=False)
    return CoinvariantLevel(n, a, fm, pres, gamma, tuple([N] * d))


def _stack(levels: List[CoinvariantLevel], n: int, a: int, ctx: RingContext) -> CoinvariantLevel:
    """Direct sum of per-factor levels, keeping each factor's generators contiguous."""
    exps: List[int] = []
    proj: Matrix = []
    sect: List[List[int]] = []
    total = sum(sum(l.blocks) for l in levels)
    off = 0
    for l in levels:
        size = sum(l.blocks)
        exps += l.presentation.exponents
        for row in l.presentation.proj:
            proj.append([0] * off + list(row) + [0] * (total - off - size))
        for s in l.presentation.sect:
            sect.append([0] * off + list(s) + [0] * (total - off - size))
        off += size
    pres = Presentation(ctx.p, a, exps, proj, sect)
    gamma = _block_diag([l.gamma_ambient for l in levels])
    G = _block_diag([l.module.G() for l in levels]) if exps else []
    mod_ctx = ctx.with_precision(a) if a != ctx.a else ctx
    fm = FiniteLevelModule(mod_ctx, n, exps, G, check=False)
    blocks = tuple(b for l in levels for b in l.blocks)
    parts = tuple(l.module.rank for l in levels)
    return CoinvariantLevel(n, a, fm, pres, gamma, blocks, True, parts)


def coinvariant_level(M: LambdaModule, n: int, a: Optional[int] = None) -> CoinvariantLevel:
    """M/omega_n M at precision a (default: the module's precision), saturated factors included."""
    ctx = M.ctx
    a = ctx.a if a is None else a
    dotted = False
    base = M
    if isinstance(M, DottedModule):
        dotted = True
        base = M.base
        if isinstance(base, DottedModule):
            return coinvariant_level(base.base, n, a)
    if isinstance(base, FiniteLevelModule):
        fm = base.dotted() if dotted else base
        if a != ctx.a:
            fm = FiniteLevelModule(ctx.with_precision(a), fm.level, fm.exponents, fm.G(), check=False)
        coinv, pres = fm.cokernel_of(fm._omega_matrix(min(n, fm.level)))
        coinv = FiniteLevelModule(coinv.ctx, n, coinv.exponents, coinv.G(), check=False)
        return CoinvariantLevel(n, a, coinv, pres, fm.G(), tuple([fm.rank]), polynomial=False)
    _check_level(ctx, n)
    if isinstance(base, ElementaryModule):
        if base.two_variable:
            raise PreconditionError("one-variable coinvariants requested for a two-variable module")
        zero = PSeries1(ctx, [])
        levels = [_square_level(SquarePresentedModule(ctx, [[f]], check=False), n, a, dotted) for f in base.factors]
        return _stack(levels, n, a, ctx)
    if isinstance(base, SquarePresentedModule):
        return _square_level(base, n, a, dotted)
    raise TypeError(f"unsupported module type {type(M).__name__}")


@dataclass(frozen=True)
class InfiniteAtPrecision:
    """Coinvariants that do not stabilise between precisions a and a+1."""

    level: int
    torsion: Tuple[int, ...]
    free_rank: Optional[int]
    exponents_a: Tuple[int, ...]
    exponents_a1: Tuple[int, ...]

    finite = False


def zp_torsion_and_rank(exps_a: Sequence[int], exps_a1: Sequence[int], a: int):
    """Split cyclic factors into Z_p-torsion and free part by comparing two precisions.

    Returns (torsion exponents, free rank); raises when the comparison is mixed.
    """
    A = sorted(exps_a, reverse=True)
    B = sorted(exps_a1, reverse=True)
    if len(A) != len(B):
        raise PrecisionError("undetermined at precision: factor counts differ between precisions")
    torsion, free = [], 0
    for x, y in zip(A, B):
        if x == y:
            torsion.append(x)
        elif x == a and y == a + 1:
            free += 1
        else:
            raise PrecisionError(f"undetermined at precision: factor {x} -> {y}")
    return tuple(sorted(torsion, reverse=True)), free


def coinvariants_at_level(M: LambdaModule, n: int) -> Union[FiniteLevelModule, InfiniteAtPrecision]:
    lo = coinvariant_level(M, n)
    hi = coinvariant_level(M, n, M.ctx.a + 1)
    if lo.module.order_exponent == hi.module.order_exponent:
        return lo.module
    try:
        tors, free = zp_torsion_and_rank(lo.module.exponents, hi.module.exponents, M.ctx.a)
    except PrecisionError:
        tors, free = (), None
    return InfiniteAtPrecision(n, tors, free, tuple(lo.module.exponents), tuple(hi.module.exponents))


def transition_matrix(lower: CoinvariantLevel, upper: CoinvariantLevel, p: int) -> Matrix:
    """Matrix of x -> nu x from M/omega_n to M/omega_{n+1}, nu = sum_{i<p} gamma^{i p^n}.

    Rows index the generators of ``upper``, columns those of ``lower``.
    """
    mod = p ** upper.a
    n = lower.level
    g = upper.gamma_ambient
    step = g
    for _ in range(n):
        step = _mat_pow_p(step, p, mod)
    cols = []
    for s in lower.presentation.sect:
        v = upper.lift_from_lower(lower, s)
        acc = list(v)
        cur = list(v)
        for _ in range(p - 1):
            cur = [sum(x * y for x, y in zip(row, cur)) % mod for row in step]
            acc = [(x + y) % mod for x, y in zip(acc, cur)]
        cols.append(upper.presentation.coords(acc))
    if not cols:
        return [[] for _ in upper.module.exponents]
    return [list(r) for r in zip(*cols)]


def _mat_pow_p(M: Matrix, p: int, mod: int) -> Matrix:
    R = M
    for _ in range(p - 1):
        R = mat_mul(R, M, mod)
    return R


def trace_map(N: FiniteLevelModule, target_level: int) -> Matrix:
    """sum_{i<p} gamma^{i p^n} on a module of level n+1 (n = target level)."""
    if N.level > target_level + 1:
        raise PreconditionError(f"module has level {N.level}, expected at most {target_level + 1}")
    return N.trace_matrix(target_level)


# --- characteristic series and growth ----------------------------------------

def char_series(M) -> PSeries1:
    """Canonical p^mu * distinguished generator of the characteristic ideal."""
    if isinstance(M, DottedModule):
        return weierstrass_prepare(involution(char_series(M.base))).canonical()
    if isinstance(M, FiniteLevelModule):
        return PSeries1(M.ctx, [1])
    if isinstance(M, ElementaryModule):
        if M.two_variable:
            raise PreconditionError("canonical form only defined for one-variable series")
        prod = PSeries1(M.ctx, [1])
        for f in M.factors:
            prod = prod * f
        raw = prod
    elif isinstance(M, SquarePresentedModule):
        raw = determinant(M.matrix) if M.size else PSeries1(M.ctx, [1])
    else:
        raise TypeError(type(M).__name__)
    if raw.is_zero():
        raise PreconditionError("characteristic series is zero at precision: not torsion")
    return weierstrass_prepare(raw).canonical()


@dataclass(frozen=True)
class ModuleOrderReport:
    """log_p |M/omega_n M| per level; ``None`` marks 'infinite at precision'."""

    levels: Tuple[int, ...]
    exponents: Tuple[Optional[int], ...]
    qualifier: dict = field(default_factory=dict)


def order_report(M: LambdaModule, levels: Sequence[int]) -> ModuleOrderReport:
    ex = []
    for n in levels:
        c = coinvariants_at_level(M, n)
        ex.append(c.order_exponent if isinstance(c, FiniteLevelModule) else None)
    return ModuleOrderReport(tuple(levels), tuple(ex), M.ctx.qualifier(levels=list(levels)))


@dataclass(frozen=True)
class GrowthFit:
    mu: int
    lam: int
    nu: int
    residual: Tuple[int, ...]
    levels: Tuple[int, ...]

    @property
    def exact(self) -> bool:
        return not any(self.residual)


def fit_growth(p: int, levels: Sequence[int], exps: Sequence[int]) -> GrowthFit:
    """Fit e_n = mu p^n + lam n + nu exactly on the top three levels."""
    if len(levels) < 3:
        raise PreconditionError("growth fit needs at least three levels")
    n0, n1, n2 = levels[-3:]
    if (n1, n2) != (n0 + 1, n0 + 2):
        raise PreconditionError("growth fit needs consecutive top levels")
    e0, e1, e2 = exps[-3:]
    d1, d2 = e1 - e0, e2 - e1
    step = p ** (n0 + 1) * (p - 1) - p ** n0 * (p - 1)
    num = d2 - d1
    if num % step:
        raise PrecisionError("not yet stable: no integral mu fits the top levels")
    mu = num // step
    lam = d1 - mu * (p ** (n0 + 1) - p ** n0)
    nu = e0 - mu * p ** n0 - lam * n0
    resid = tuple(e - (mu * p ** n + lam * n + nu) for n, e in zip(levels, exps))
    return GrowthFit(mu, lam, nu, resid, tuple(levels))


def iwasawa_invariants_via_growth(M: LambdaModule, n_range: Sequence[int]) -> GrowthFit:
    levels = list(n_range)
    rep = order_report(M, levels)
    if any(e is None for e in rep.exponents):
        bad = levels[rep.exponents.index(None)]
        raise PreconditionError(f"coinvariants infinite at level {bad}", level=bad)
    fit = fit_growth(M.ctx.p, levels, rep.exponents)
    top = fit.residual[-3:]
    if any(top):
        raise PrecisionError("not yet stable")
    return fit


def is_pseudo_null(M: LambdaModule, levels: Sequence[int] = (0, 1, 2)) -> bool:
    """Pseudo-null = finite here (two-dimensional Lambda)."""
    if isinstance(M, DottedModule):
        return is_pseudo_null(M.base, levels)
    if isinstance(M, FiniteLevelModule):
        rep = order_report(M, levels)
        ex = rep.exponents
        if any(e is None for e in ex):
            raise IndeterminateAtPrecision("finite module reported infinite coinvariants")
        return True
    if isinstance(M, ElementaryModule) and not M.factors:
        return True
    c = char_series(M)
    if c.poly() != [1]:
        return False
    rep = order_report(M, levels)
    if any(e != rep.exponents[0] for e in rep.exponents):
        raise IndeterminateAtPrecision("unit characteristic series but non-constant coinvariant orders")
    return True

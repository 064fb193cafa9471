"""Finite abelian p-groups ⊕ Z/p^{e_i} with a gamma-action.

Subgroups and quotients are computed by Smith normal form of the relation
matrix; every result carries an explicit cyclic decomposition so duals,
kernels and cokernels stay plain linear algebra.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, List, Optional, Sequence, Tuple

from .errors import PreconditionError
from .padic import (
    Matrix,
    RingContext,
    identity,
    kernel_basis,
    mat_mul,
    mat_pow,
    smith_normal_form,
    solve,
)


def reduce_action(G: Matrix, exps: Sequence[int], p: int) -> Matrix:
    return [[x % p ** exps[i] for x in row] for i, row in enumerate(G)]


def is_well_defined(G: Matrix, src: Sequence[int], tgt: Sequence[int], p: int) -> bool:
    """Does G (tgt x src) send each relation p^{src_j} e_j into the relations of the target?"""
    return all(G[i][j] * p ** src[j] % p ** tgt[i] == 0 for i in range(len(tgt)) for j in range(len(src)))


def dual_matrix(G: Matrix, src: Sequence[int], tgt: Sequence[int], p: int) -> Matrix:
    """Matrix of the Pontryagin dual map Hom(tgt, Q_p/Z_p) -> Hom(src, Q_p/Z_p).

    Dual coordinates: the character e_i^* sends e_i to 1/p^{e_i}.
    """
    out = [[0] * len(tgt) for _ in src]
    for j, aj in enumerate(src):
        for i, bi in enumerate(tgt):
            x = G[i][j]
            if aj >= bi:
                v = x * p ** (aj - bi)
            else:
                q = p ** (bi - aj)
                if x % q:
                    raise PreconditionError("map is not well defined on the cyclic decomposition")
                v = x // q
            out[j][i] = v % p ** aj
    return out


@dataclass
class Presentation:
    """A subquotient of an ambient (Z/p^a)^r with relations p^{e_i} e_i.

    ``proj`` maps ambient vectors to cyclic coordinates of the new module,
    ``sect`` lists ambient vectors lifting the new generators.
    """

    p: int
    a: int
    exponents: List[int]
    proj: Matrix
    sect: List[List[int]]
    _solver: Optional[tuple] = None

    def coords(self, v: Sequence[int]) -> List[int]:
        if self._solver is not None:
            B, snf, s = self._solver
            sol = solve(B, v, self.p, self.a, snf)
            if sol is None:
                raise PreconditionError("vector does not lie in the submodule")
            v = sol[:s]
        return [sum(x * y for x, y in zip(row, v)) % self.p ** e for row, e in zip(self.proj, self.exponents)]

    def induced(self, phi: Matrix) -> Matrix:
        """Matrix on the new generators of an ambient endomorphism preserving the subquotient."""
        mod = self.p ** self.a
        cols = []
        for s in self.sect:
            img = [sum(x * y for x, y in zip(row, s)) % mod for row in phi]
            cols.append(self.coords(img))
        return [list(r) for r in zip(*cols)] if cols else []


def quotient(p: int, a: int, exps: Sequence[int], relations: Sequence[Sequence[int]]) -> Presentation:
    r = len(exps)
    mod = p ** a
    cols = [[(p ** e if i == k else 0) % mod for i in range(r)] for k, e in enumerate(exps)]
    cols += [list(v) for v in relations]
    B = [list(row) for row in zip(*cols)] if r else []
    if r == 0:
        return Presentation(p, a, [], [], [])
    snf = smith_normal_form(B, p, a)
    kept = [k for k in range(r) if snf.exponents[k] > 0]
    return Presentation(
        p, a,
        [snf.exponents[k] for k in kept],
        [snf.left[k][:] for k in kept],
        [[snf.left_inv[i][k] for i in range(r)] for k in kept],
    )


def submodule(p: int, a: int, exps: Sequence[int], gens: Sequence[Sequence[int]]) -> Presentation:
    r = len(exps)
    s = len(gens)
    mod = p ** a
    if s == 0 or r == 0:
        return Presentation(p, a, [], [], [])
    cols = [list(g) for g in gens] + [[(p ** e if i == k else 0) % mod for i in range(r)] for k, e in enumerate(exps)]
    B = [list(row) for row in zip(*cols)]
    snf = smith_normal_form(B, p, a)
    rel = [z[:s] for z in kernel_basis(B, p, a, snf)]
    inner = quotient(p, a, [a] * s, rel)
    sect = []
    for c in inner.sect:
        sect.append([sum(g[i] * c[k] for k, g in enumerate(gens)) % mod for i in range(r)])
    return Presentation(p, a, inner.exponents, inner.proj, sect, (B, snf, s))


@dataclass(frozen=True)
class FiniteLevelModule:
    """⊕ Z/p^{e_i} with gamma acting by ``action`` (column j = image of e_j).

    ``level`` n asserts that gamma^{p^n} acts trivially.
    """

    ctx: RingContext
    level: int
    exponents: Tuple[int, ...]
    action: Tuple[Tuple[int, ...], ...]

    def __init__(self, ctx: RingContext, level: Optional[int], exponents: Sequence[int], action: Optional[Matrix] = None, check: bool = True):
        exps = tuple(int(e) for e in exponents)
        p = ctx.p
        if any(e < 0 or e > ctx.a for e in exps):
            raise PreconditionError(f"exponents must lie in [0, a={ctx.a}]", exponents=exps)
        G = action if action is not None else identity(len(exps))
        keep = [i for i, e in enumerate(exps) if e > 0]
        if len(keep) < len(exps):
            exps = tuple(exps[i] for i in keep)
            G = [[G[i][j] for j in keep] for i in keep]
        G = reduce_action([list(r) for r in G], exps, p)
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "action", tuple(tuple(r) for r in G))
        if check and not is_well_defined(G, exps, exps, p):
            raise PreconditionError("action matrix is not compatible with the cyclic decomposition")
        if level is None:
            level = self._minimal_level()
        elif check and not self._is_identity(self.gamma_power(p ** level)):
            raise PreconditionError(f"gamma^(p^{level}) does not act trivially")
        object.__setattr__(self, "level", level)

    # -- basic data
    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def orders(self) -> List[int]:
        return [self.p ** e for e in self.exponents]

    @property
    def order_exponent(self) -> int:
        return sum(self.exponents)

    @property
    def rank(self) -> int:
        return len(self.exponents)

    def G(self) -> Matrix:
        return [list(r) for r in self.action]

    def _is_identity(self, M: Matrix) -> bool:
        return all((M[i][j] - (i == j)) % self.p ** self.exponents[i] == 0 for i in range(self.rank) for j in range(self.rank))

    def gamma_power(self, k: int) -> Matrix:
        mod = self.ctx.modulus
        if k >= 0:
            M = mat_pow(self.G(), k, mod)
        else:
            M = mat_pow(self.inverse_action(), -k, mod)
        return reduce_action(M, self.exponents, self.p)

    def _minimal_level(self) -> int:
        M = self.G()
        mod = self.ctx.modulus
        for n in range(0, 4 * self.ctx.a + 8):
            if self._is_identity(reduce_action(M, self.exponents, self.p)):
                return n
            M = mat_pow(M, self.p, mod)
        raise PreconditionError("gamma does not have p-power order on this module")

    def inverse_action(self) -> Matrix:
        N = self.p ** self.level
        return reduce_action(mat_pow(self.G(), N - 1, self.ctx.modulus), self.exponents, self.p)

    def with_action(self, G: Matrix, level: Optional[int] = None) -> "FiniteLevelModule":
        return FiniteLevelModule(self.ctx, self.level if level is None else level, self.exponents, G)

    def dotted(self) -> "FiniteLevelModule":
        return FiniteLevelModule(self.ctx, self.level, self.exponents, self.inverse_action(), check=False)

    def elements(self) -> Iterator[Tuple[int, ...]]:
        return product(*[range(self.p ** e) for e in self.exponents])

    def apply(self, M: Matrix, x: Sequence[int]) -> List[int]:
        return [sum(c * y for c, y in zip(row, x)) % self.p ** e for row, e in zip(M, self.exponents)]

    # -- constructions
    def _endo_presentation_kernel(self, phi: Matrix) -> Presentation:
        p, a = self.p, self.ctx.a
        mod = p ** a
        r = self.rank
        cols = [[phi[i][j] for i in range(r)] for j in range(r)]
        cols += [[(p ** e if i == k else 0) % mod for i in range(r)] for k, e in enumerate(self.exponents)]
        B = [list(row) for row in zip(*cols)]
        gens = [z[:r] for z in kernel_basis(B, p, a)]
        return submodule(p, a, self.exponents, gens)

    def kernel_of(self, phi: Matrix) -> Tuple["FiniteLevelModule", Presentation]:
        pres = self._endo_presentation_kernel(phi)
        G = pres.induced(self.G()) if pres.exponents else []
        return FiniteLevelModule(self.ctx, self.level, pres.exponents, G, check=False), pres

    def cokernel_of(self, phi: Matrix) -> Tuple["FiniteLevelModule", Presentation]:
        r = self.rank
        rel = [[phi[i][j] for i in range(r)] for j in range(r)]
        pres = quotient(self.p, self.ctx.a, self.exponents, rel)
        G = pres.induced(self.G()) if pres.exponents else []
        return FiniteLevelModule(self.ctx, self.level, pres.exponents, G, check=False), pres

    def _omega_matrix(self, m: int) -> Matrix:
        M = self.gamma_power(self.p ** m)
        mod = self.ctx.modulus
        return [[(M[i][j] - (i == j)) % mod for j in range(self.rank)] for i in range(self.rank)]

    def invariants(self, m: int = 0) -> "FiniteLevelModule":
        """ker(gamma^{p^m} - 1)."""
        if m > self.level:
            m = self.level
        return self.kernel_of(self._omega_matrix(m))[0]

    def coinvariants(self, m: int = 0) -> "FiniteLevelModule":
        """coker(gamma^{p^m} - 1)."""
        mod, pres = self.cokernel_of(self._omega_matrix(m))
        return FiniteLevelModule(self.ctx, min(m, mod.level), mod.exponents, mod.G(), check=False)

    def pontryagin_dual(self) -> "FiniteLevelModule":
        """Hom(N, Q_p/Z_p) with (tau f)(x) = f(tau^{-1} x)."""
        Gd = dual_matrix(self.inverse_action(), self.exponents, self.exponents, self.p)
        return FiniteLevelModule(self.ctx, self.level, self.exponents, Gd, check=False)

    def trace_matrix(self, n: int) -> Matrix:
        """sum_{i<p} gamma^{i p^n} (trace from level n+1 down to level n)."""
        g = self.gamma_power(self.p ** n)
        mod = self.ctx.modulus
        acc = identity(self.rank)
        cur = identity(self.rank)
        for _ in range(self.p - 1):
            cur = mat_mul(cur, g, mod)
            acc = [[(x + y) % mod for x, y in zip(r, s)] for r, s in zip(acc, cur)]
        return reduce_action(acc, self.exponents, self.p)

    def image_order_exponent(self, M: Matrix, source_exps: Sequence[int]) -> int:
        """log_p of |image| of a map source -> self given by M (rows: self, cols: source)."""
        gens = [[M[i][j] for i in range(self.rank)] for j in range(len(source_exps))]
        return sum(submodule(self.p, self.ctx.a, self.exponents, gens).exponents)

    def direct_sum(self, other: "FiniteLevelModule") -> "FiniteLevelModule":
        r, s = self.rank, other.rank
        G = [[0] * (r + s) for _ in range(r + s)]
        for i in range(r):
            G[i][:r] = self.action[i]
        for i in range(s):
            G[r + i][r:] = other.action[i]
        return FiniteLevelModule(self.ctx, max(self.level, other.level), self.exponents + other.exponents, G, check=False)

    def is_isomorphic_action(self, other: "FiniteLevelModule") -> bool:
        """Same invariant factors, and same orders of all gamma^k - 1 kernels (a conjugacy proxy)."""
        if sorted(self.exponents) != sorted(other.exponents):
            return False
        for k in range(self.p ** max(self.level, other.level)):
            a = self.kernel_of(_minus_identity(self.gamma_power(k), self.ctx.modulus))[0]
            b = other.kernel_of(_minus_identity(other.gamma_power(k), other.ctx.modulus))[0]
            if sorted(a.exponents) != sorted(b.exponents):
                return False
        return True

    def to_dict(self) -> dict:
        return {"kind": "finite", "level": self.level, "orders": self.orders, "action": self.G()}


def _minus_identity(M: Matrix, mod: int) -> Matrix:
    return [[(x - (i == j)) % mod for j, x in enumerate(row)] for i, row in enumerate(M)]


def direct_sum_all(mods: Sequence[FiniteLevelModule], ctx: RingContext, level: int) -> FiniteLevelModule:
    out = FiniteLevelModule(ctx, level, [], [])
    for m in mods:
        out = out.direct_sum(m)
    return FiniteLevelModule(ctx, max(level, out.level), out.exponents, out.G(), check=False)

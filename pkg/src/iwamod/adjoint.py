"""The Iwasawa adjoint a^1(M) as a limit of finite-level duals.

The tower is never materialised as an infinite object: an ``AdjointLimit``
keeps the level modules up to ``n_max``, the trace-induced transitions, and
the orders of the images of the top level (the visible part of the limit).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import IndeterminateAtPrecision, PreconditionError, PrecisionError
from .finite import FiniteLevelModule, dual_matrix, submodule
from .modules import (
    DottedModule,
    ElementaryModule,
    FiniteLevelModule as _FLM,
    GrowthFit,
    SquarePresentedModule,
    char_series,
    coinvariant_level,
    coinvariants_at_level,
    dot,
    fit_growth,
    transition_matrix,
)
from .padic import Matrix, mat_mul
from .series import mu_lambda


def finite_level_adjoint(N: FiniteLevelModule) -> FiniteLevelModule:
    """Pontryagin dual of N (all of N is Z_p-torsion), with the dotted action.

    Dual of the dotted module: gamma acts on characters by f -> f o gamma.
    """
    G = dual_matrix(N.G(), N.exponents, N.exponents, N.p)
    return FiniteLevelModule(N.ctx, N.level, N.exponents, G, check=False)


@dataclass
class AdjointLimit:
    levels: List[FiniteLevelModule]
    transitions: List[Matrix]  # transitions[n]: levels[n+1] -> levels[n]
    limit_exponents: List[int] = field(default_factory=list)
    fits: List[Optional[GrowthFit]] = field(default_factory=list)
    qualifier: dict = field(default_factory=dict)

    @classmethod
    def from_tower(cls, levels: Sequence[FiniteLevelModule], transitions: Sequence[Matrix], qualifier=None) -> "AdjointLimit":
        lim = cls(list(levels), [list(map(list, t)) for t in transitions], qualifier=dict(qualifier or {}))
        lim._summarise()
        return lim

    @property
    def n_max(self) -> int:
        return len(self.levels) - 1

    @property
    def level_exponents(self) -> List[int]:
        return [L.order_exponent for L in self.levels]

    def composite(self, top: int, n: int) -> Matrix:
        """Transition from level ``top`` down to level ``n``."""
        M = None
        mod = self.levels[0].ctx.modulus
        for k in range(top - 1, n - 1, -1):
            t = self.transitions[k]
            M = t if M is None else mat_mul(t, M, mod)
        return M

    def image_exponent(self, top: int, n: int, source_vectors: Optional[List[List[int]]] = None) -> int:
        target = self.levels[n]
        if top == n:
            if source_vectors is None:
                return target.order_exponent
            return sum(submodule(target.p, target.ctx.a, target.exponents, source_vectors).exponents)
        M = self.composite(top, n)
        src = self.levels[top]
        if source_vectors is None:
            return target.image_order_exponent(M, src.exponents)
        gens = [target.apply(M, v) for v in source_vectors]
        return sum(submodule(target.p, target.ctx.a, target.exponents, gens).exponents)

    def _summarise(self):
        top = self.n_max
        self.limit_exponents = [self.image_exponent(top, n) for n in range(top + 1)]
        p = self.levels[0].p if self.levels else 3
        self.fits = []
        for end in range(2, top + 1):
            try:
                self.fits.append(fit_growth(p, list(range(end - 2, end + 1)), self.limit_exponents[end - 2:end + 1]))
            except (PrecisionError, PreconditionError):
                self.fits.append(None)

    @property
    def stabilized(self) -> bool:
        if len(self.fits) < 2 or self.fits[-1] is None or self.fits[-2] is None:
            return False
        a, b = self.fits[-2], self.fits[-1]
        return (a.mu, a.lam, a.nu) == (b.mu, b.lam, b.nu)

    @property
    def invariants(self) -> Optional[Tuple[int, int]]:
        """Stabilised (mu, lambda) of the limit, or None."""
        if not self.stabilized:
            return None
        f = self.fits[-1]
        return f.mu, f.lam

    @property
    def vanishes(self) -> bool:
        """The image of the top level in level 0 is trivial."""
        return bool(self.limit_exponents) and self.limit_exponents[0] == 0

    def summary(self) -> dict:
        inv = self.invariants
        return {
            "level_exponents": self.level_exponents,
            "limit_exponents": self.limit_exponents,
            "stabilized": self.stabilized,
            "mu_lambda": list(inv) if inv else None,
            "vanishes_at_level_0": self.vanishes,
            "qualifier": self.qualifier,
        }


def adjoint_via_limit(M, n_max: int) -> AdjointLimit:
    levels = []
    for n in range(n_max + 1):
        c = coinvariants_at_level(M, n)
        if not isinstance(c, _FLM):
            raise PreconditionError(f"coinvariants infinite at level {n}", level=n)
        levels.append(coinvariant_level(M, n))
    adj = [finite_level_adjoint(L.module) for L in levels]
    trans = []
    p = M.ctx.p
    for n in range(n_max):
        up = transition_matrix(levels[n], levels[n + 1], p)
        trans.append(dual_matrix(up, levels[n].module.exponents, levels[n + 1].module.exponents, p))
    return AdjointLimit.from_tower(adj, trans, M.ctx.qualifier(n_max=n_max))


def adjoint_elementary(M: ElementaryModule, dotted: bool = False):
    """Closed form: a^1 of an elementary module is the module itself (its dot when ``dotted``)."""
    if M.two_variable:
        raise PreconditionError("closed-form adjoint implemented for one-variable modules")
    E = ElementaryModule(M.ctx, M.factors)
    return dot(E) if dotted else E


def adjoint_presented(M: SquarePresentedModule) -> SquarePresentedModule:
    """a^1(coker A) = coker(A^T) for a square presentation (projective dimension <= 1)."""
    return M.transpose()


@dataclass
class Prop111Report:
    level: int
    holds: Optional[bool]
    left_exponent: Optional[int]
    adjoint_coinvariant_exponent: Optional[int]
    a2_invariant_exponent: int
    failures: List[str]
    qualifier: dict

    def to_dict(self):
        return dict(self.__dict__)


def verify_prop_111(M, n: int, finite_summand: Optional[FiniteLevelModule] = None) -> Prop111Report:
    """Order identity |a^1_{Lambda_n}(M_{Gamma_n})| = |a^1(M)_{Gamma_n}| * |a^2(M)^{Gamma_n}|.

    The a^2 term is nonzero only for an explicitly finite summand F, where
    a^2(F) is the (dotted) Pontryagin dual of F.
    """
    failures = []
    if isinstance(M, ElementaryModule):
        a1 = adjoint_elementary(M).presentation().transpose() if M.factors else None
    elif isinstance(M, SquarePresentedModule):
        a1 = adjoint_presented(M)
    else:
        raise TypeError(type(M).__name__)
    left = 0
    if not (isinstance(M, ElementaryModule) and not M.factors):
        c = coinvariants_at_level(M, n)
        if not isinstance(c, _FLM):
            failures.append(f"M/omega_{n} is not torsion over Lambda_{n}")
            return Prop111Report(n, None, None, None, 0, failures, M.ctx.qualifier(level=n))
        left += finite_level_adjoint(c).order_exponent
    a2 = 0
    if finite_summand is not None:
        Fc = finite_summand.coinvariants(min(n, finite_summand.level))
        left += finite_level_adjoint(Fc).order_exponent
        a2F = finite_summand.dotted().pontryagin_dual()
        a2 = a2F.invariants(min(n, a2F.level)).order_exponent
    right = 0
    if a1 is not None:
        ca = coinvariants_at_level(a1, n)
        if not isinstance(ca, _FLM):
            failures.append(f"a^1(M)/omega_{n} is not finite at precision")
            return Prop111Report(n, None, left, None, a2, failures, M.ctx.qualifier(level=n))
        right = ca.order_exponent
    return Prop111Report(n, left == right + a2, left, right, a2, failures, M.ctx.qualifier(level=n))


def no_finite_submodule_check(limit: AdjointLimit) -> bool:
    """Shadow of 'a^1 has no nonzero finite submodule'.

    A finite submodule of the limit has nonzero gamma-invariants, whose
    components persist through every transition.  The gamma-invariants of the
    top level are pushed down to level 0: a trivial image means none was seen;
    a nonzero image that is the same from the two highest levels is a stable
    finite kernel.  Anything else is undetermined for this tower length.
    """
    top = limit.n_max
    if top < 0 or all(L.rank == 0 for L in limit.levels):
        return True
    if top < 2:
        raise IndeterminateAtPrecision("tower too short to decide")

    def pushed(src: int) -> int:
        X = limit.levels[src]
        inv, pres = X.kernel_of(X._omega_matrix(0))
        vecs = pres.sect
        return limit.image_exponent(src, 0, vecs) if vecs else 0

    e_top = pushed(top)
    if e_top == 0:
        return True
    if pushed(top - 1) == e_top:
        return False
    raise IndeterminateAtPrecision("tower too short to decide")

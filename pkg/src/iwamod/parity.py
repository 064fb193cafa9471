"""Projective systems of finite Z_p-modules: Guo's rank count and the parity argument."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from . import poly
from .errors import IndeterminateAtPrecision, PreconditionError
from .finite import FiniteLevelModule, quotient
from .modules import ElementaryModule, coinvariant_level
from .padic import Matrix, RingContext, balanced, rank_mod_p, smith_normal_form
from .pairing import FiniteForm, check_axioms, form_nondegeneracy
from .series import PSeries2


@dataclass
class ProjectiveSystem:
    """Surjective tower M_0 <- M_1 <- ... ; ``transitions[n]`` maps level n+1 onto level n."""

    ctx: RingContext
    levels: List[FiniteLevelModule]
    transitions: List[Matrix]
    forms: Optional[List[Optional[FiniteForm]]] = None
    kernel_bounds: Optional[List[int]] = None

    def __post_init__(self):
        if len(self.transitions) != max(0, len(self.levels) - 1):
            raise PreconditionError("need one transition per consecutive pair of levels")
        for n, t in enumerate(self.transitions):
            lo = self.levels[n]
            if lo.rank == 0:
                continue
            if len(t) != lo.rank or any(len(r) != self.levels[n + 1].rank for r in t):
                raise PreconditionError(f"transition {n + 1} -> {n} has the wrong shape", level=n)
            if rank_mod_p(t, self.ctx.p) != lo.rank:
                raise PreconditionError(f"transition {n + 1} -> {n} is not surjective", level=n)

    @property
    def horizon(self) -> int:
        return len(self.levels) - 1

    @property
    def d(self) -> int:
        return max((L.rank for L in self.levels), default=0)

    def to_dict(self) -> dict:
        return {
            "levels": [L.to_dict() for L in self.levels],
            "transitions": self.transitions,
            "forms": [f.to_dict() if f else None for f in self.forms] if self.forms else None,
            "kernel_bounds": self.kernel_bounds,
        }


@dataclass(frozen=True)
class RankEstimate:
    d: int
    unbounded_count: int
    horizon: int
    confidence: str = "exact within horizon"
    growing: tuple = ()

    def to_dict(self) -> dict:
        return {"d": self.d, "unbounded_count": self.unbounded_count, "horizon": self.horizon,
                "confidence": self.confidence, "growing": list(self.growing)}


def divisor_profile(system: ProjectiveSystem, n: int) -> tuple:
    if not 0 <= n <= system.horizon:
        raise PreconditionError(f"level {n} does not exist", level=n)
    ex = sorted(system.levels[n].exponents, reverse=True)
    return tuple(ex + [0] * (system.d - len(ex)))


def guo_rank(system: ProjectiveSystem, horizon: Optional[int] = None) -> RankEstimate:
    """Number of j whose r_j grows between the last two levels and exceeds precision / 2."""
    h = system.horizon if horizon is None else horizon
    if h > system.horizon:
        raise PreconditionError(f"horizon {h} beyond the system", level=h)
    if h < 1:
        raise IndeterminateAtPrecision("need at least two levels")
    a = system.ctx.a
    top, prev = divisor_profile(system, h), divisor_profile(system, h - 1)
    grow = tuple(j for j in range(system.d) if top[j] > prev[j] and 2 * top[j] > a)
    return RankEstimate(system.d, len(grow), h, growing=grow)


@dataclass
class ParityVerdict:
    passed: bool
    refused: bool
    rank: Optional[int]
    even: Optional[bool]
    violations: List[dict] = field(default_factory=list)
    quotient_profiles: List[tuple] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "refused": self.refused, "rank": self.rank, "even": self.even,
                "violations": self.violations, "quotient_profiles": [list(x) for x in self.quotient_profiles]}


def _quotient_by_kernel(N: FiniteLevelModule, form: FiniteForm, gens: List[List[int]]):
    p, a = N.p, max([N.ctx.a] + list(N.exponents))
    pres = quotient(p, a, N.exponents, gens)
    return sorted(pres.exponents, reverse=True)


def parity_check(system: ProjectiveSystem, horizon: Optional[int] = None) -> ParityVerdict:
    """Pairing of invariant factors under quasi-nondegenerate alternating forms, then an even rank."""
    h = system.horizon if horizon is None else horizon
    if not system.forms or len(system.forms) <= h:
        raise PreconditionError("each level needs an alternating form")
    bounds = system.kernel_bounds or [0] * (h + 1)
    violations = []
    profiles = []
    for n in range(h + 1):
        N, form = system.levels[n], system.forms[n]
        rep = check_axioms(form, claims=["bilinear", "alternating"], exhaustive_limit=0)
        if not rep.passed:
            violations.append({"level": n, "clause": "alternating", "detail": str(rep.counterexamples)})
            continue
        nd = form_nondegeneracy(form)
        if nd.left_kernel_exponents and max(nd.left_kernel_exponents) > bounds[n]:
            violations.append({"level": n, "clause": "kernel bound",
                               "detail": f"kernel {nd.left_kernel_exponents} not killed by p^{bounds[n]}"})
            continue
        prof = _quotient_by_kernel(N, form, nd.left_kernel_generators)
        profiles.append(tuple(prof))
        if len(prof) % 2:
            violations.append({"level": n, "clause": "pairing", "indices": [len(prof)], "detail": "odd factor count"})
            continue
        for j in range(0, len(prof), 2):
            if prof[j] != prof[j + 1]:
                violations.append({"level": n, "clause": "pairing", "indices": [j + 1, j + 2],
                                   "detail": f"r_{j + 1} = {prof[j]} != r_{j + 2} = {prof[j + 1]}"})
    if violations:
        return ParityVerdict(False, True, None, None, violations, profiles)
    rank = guo_rank(system, h).unbounded_count if h >= 1 else 0
    return ParityVerdict(rank % 2 == 0, False, rank, rank % 2 == 0, [], profiles)


# --- constructions -----------------------------------------------------------------

def projection_matrix(lower, upper, p: int) -> Matrix:
    """Matrix of the natural surjection M/omega_{n+1} -> M/omega_n on coinvariant levels."""
    mod = p ** lower.a
    w = poly.omega(p, lower.level, mod)
    cols = []
    for s in upper.presentation.sect:
        amb, pos = [], 0
        for bu in upper.blocks:
            blk = s[pos:pos + bu]
            pos += bu
            amb += list(poly.reduce_mod(blk, w, mod))
        cols.append(lower.presentation.coords(amb))
    if not cols:
        return [[] for _ in lower.module.exponents]
    return [list(r) for r in zip(*cols)]


def coinvariant_system(M: ElementaryModule, horizon: int) -> ProjectiveSystem:
    levels = [coinvariant_level(M, n) for n in range(horizon + 1)]
    trans = [projection_matrix(levels[n], levels[n + 1], M.ctx.p) for n in range(horizon)]
    return ProjectiveSystem(M.ctx, [L.module for L in levels], trans)


def cyclic_tower(ctx: RingContext, exponent_fn, horizon: int) -> ProjectiveSystem:
    """Tower of cyclic groups Z/p^{e(n)} with reduction maps (e nondecreasing)."""
    levels = [FiniteLevelModule(ctx, 0, [exponent_fn(n)] if exponent_fn(n) else [], check=False)
              for n in range(horizon + 1)]
    trans = [[[1]] if levels[n].rank else [] for n in range(horizon)]
    return ProjectiveSystem(ctx, levels, trans)


def direct_sum_systems(systems: Sequence[ProjectiveSystem]) -> ProjectiveSystem:
    ctx = systems[0].ctx
    h = min(s.horizon for s in systems)
    levels, trans, forms = [], [], []
    with_forms = all(s.forms for s in systems)
    for n in range(h + 1):
        exps = [e for s in systems for e in s.levels[n].exponents]
        levels.append(FiniteLevelModule(ctx, 0, exps, check=False))
        if with_forms:
            r = len(exps)
            B = [[Fraction(0)] * r for _ in range(r)]
            off = 0
            for s in systems:
                f = s.forms[n]
                k = s.levels[n].rank
                for i in range(k):
                    for j in range(k):
                        B[off + i][off + j] = f.matrix[i][j]
                off += k
            forms.append(FiniteForm(levels[-1], levels[-1], B, alternating=True))
    for n in range(h):
        rows = sum(s.levels[n].rank for s in systems)
        cols = sum(s.levels[n + 1].rank for s in systems)
        T = [[0] * cols for _ in range(rows)]
        ro = co = 0
        for s in systems:
            t = s.transitions[n]
            for i, row in enumerate(t):
                for j, x in enumerate(row):
                    T[ro + i][co + j] = x
            ro += s.levels[n].rank
            co += s.levels[n + 1].rank
        trans.append(T)
    bounds = None
    if with_forms:
        bounds = [max((s.kernel_bounds or [0] * (h + 1))[n] for s in systems) for n in range(h + 1)]
    return ProjectiveSystem(ctx, levels, trans, forms if with_forms else None, bounds)


def symplectic_tower(ctx: RingContext, exponent_fn, horizon: int) -> ProjectiveSystem:
    """(Z/p^{e(n)})^2 with the standard alternating form at every level."""
    p = ctx.p
    levels, forms = [], []
    for n in range(horizon + 1):
        e = exponent_fn(n)
        N = FiniteLevelModule(ctx, 0, [e, e] if e else [], check=False)
        levels.append(N)
        B = [[Fraction(0), Fraction(1, p ** e)], [Fraction(-1, p ** e), Fraction(0)]] if e else []
        forms.append(FiniteForm(N, N, B, alternating=True))
    trans = [[[1, 0], [0, 1]] if levels[n].rank else [] for n in range(horizon)]
    return ProjectiveSystem(ctx, levels, trans, forms, [0] * (horizon + 1))


def zero_form_tower(ctx: RingContext, exponent_fn, horizon: int, bound: int = 0) -> ProjectiveSystem:
    """Cyclic tower carrying the only alternating form it admits (zero)."""
    sys_ = cyclic_tower(ctx, exponent_fn, horizon)
    forms = [FiniteForm(L, L, [[Fraction(0)] * L.rank for _ in range(L.rank)], alternating=True) for L in sys_.levels]
    return ProjectiveSystem(ctx, sys_.levels, sys_.transitions, forms, [bound] * (horizon + 1))


# --- lambda congruence -------------------------------------------------------------

def _stable_corank(Fpoly_fn, p: int, n: int, a: int) -> int:
    """Q_p-corank of multiplication by F(T1) on Z_p[T1]/(omega_n), stable between a and a+1."""
    res = []
    for b in (a, a + 1):
        mod = p ** b
        A = poly.mult_matrix(Fpoly_fn(mod), poly.omega(p, n, mod), mod)
        ex = smith_normal_form(A, p, b, transforms=False).exponents
        res.append(sum(1 for e in ex if e >= b) + (len(A) - len(ex)))
    if res[0] != res[1]:
        raise IndeterminateAtPrecision(f"corank undetermined at precision (level {n})")
    return res[0]


@dataclass
class LambdaCongruence:
    lambdas: Dict[int, Optional[int]]
    holds: bool
    xi_ranks: Dict[int, Optional[int]]
    xi_holds: bool
    flags: Dict[int, str]
    qualifier: dict

    def to_dict(self) -> dict:
        return {"lambdas": {str(k): v for k, v in self.lambdas.items()}, "holds": self.holds,
                "xi_ranks": {str(k): v for k, v in self.xi_ranks.items()}, "xi_holds": self.xi_holds,
                "flags": {str(k): v for k, v in self.flags.items()}, "qualifier": self.qualifier}


def _congruent(seq: Dict[int, Optional[int]], p: int) -> bool:
    vals = [v for v in seq.values() if v is not None]
    return bool(vals) and all((v - vals[0]) % (p - 1) == 0 for v in vals)


def lambda_congruence_check(M: ElementaryModule, n_range: Sequence[int] = (0, 1, 2),
                            probes: Sequence[int] = (1, 2, 3)) -> LambdaCongruence:
    """lambda_n for M / omega_n(T1), and the congruence lambda_n = lambda_0 mod (p - 1).

    ``lambdas``: Z_p-corank of multiplication by F(T1, 0) on Z_p[T1]/(omega_n).
    ``xi_ranks``: generic Z_p[[T2]]-corank, i.e. the largest Q_p-rank of the
    specialisations T2 = p c (c in ``probes``), subtracted from p^n.
    """
    if not M.two_variable:
        raise PreconditionError("lambda congruence is stated for two-variable modules")
    ctx = M.ctx
    p, a = ctx.p, ctx.a
    lam, xi, flags = {}, {}, {}
    for n in n_range:
        if ctx.m <= p ** n:
            flags[n] = "truncation too short"
            lam[n] = xi[n] = None
            continue
        tot = tot_xi = 0
        try:
            for F in M.factors:
                F2 = F if isinstance(F, PSeries2) else PSeries2(ctx, [[c] for c in F.coeffs])
                fn0 = lambda mod, F2=F2: [x % mod for x in _specialize(F2, 0, mod)]
                tot += _stable_corank(fn0, p, n, a)
                best = p ** n
                for c in probes:
                    fnc = lambda mod, F2=F2, c=c: _specialize(F2, p * c, mod)
                    best = min(best, _stable_corank(fnc, p, n, a))
                tot_xi += best
        except IndeterminateAtPrecision as exc:
            flags[n] = str(exc)
            lam[n] = xi[n] = None
            continue
        lam[n], xi[n] = tot, tot_xi
    return LambdaCongruence(lam, _congruent(lam, p), xi, _congruent(xi, p), flags,
                            ctx.qualifier(levels=list(n_range)))


def _specialize(F: PSeries2, value: int, mod: int) -> List[int]:
    pw = [pow(value, j, mod) for j in range(F.ctx.m)]
    base = F.ctx.modulus
    return [sum(balanced(c, base) * w for c, w in zip(row, pw)) % mod for row in F.coeffs]

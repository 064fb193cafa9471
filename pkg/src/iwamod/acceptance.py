"""The ten acceptance criteria, shared by the ``suite`` command and the test-suite."""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from . import poly
from .adjoint import adjoint_elementary, adjoint_via_limit, verify_prop_111
from .errors import IwamodError
from .finite import FiniteLevelModule
from .modules import (
    ElementaryModule,
    SquarePresentedModule,
    coinvariants_at_level,
    determinant,
    fit_growth,
    order_report,
)
from .padic import RingContext
from .pairing import exhaustive_square_search, functional_equation_check
from .parity import (
    cyclic_tower,
    direct_sum_systems,
    guo_rank,
    lambda_congruence_check,
    parity_check,
    symplectic_tower,
    zero_form_tower,
)
from .series import (
    Character,
    PSeries1,
    PSeries2,
    admissible_line_search,
    admissible_twist_search,
    cotorsion_test,
    involution,
    mu_lambda,
    weierstrass_prepare,
)

DEFAULT_SEED = 20240601


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    checked: int
    failures: List[str] = field(default_factory=list)
    elapsed: float = 0.0
    time_limit: Optional[float] = None
    details: Dict[str, object] = field(default_factory=dict)

    @property
    def within_time(self) -> bool:
        return self.time_limit is None or self.elapsed < self.time_limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        limit = f" (limit {self.time_limit:.0f}s)" if self.time_limit else ""
        extra = "" if self.within_time else " [time limit exceeded]"
        first = f"; first failure: {self.failures[0]}" if self.failures else ""
        return (f"criterion {self.number:2d} {status}  {self.name}: {self.checked} checked, "
                f"{len(self.failures)} failed, {self.elapsed:.2f}s{limit}{extra}{first}")

    def to_dict(self) -> dict:
        # timing stays out of the comparable body; only the verdict on it is kept
        return {"number": self.number, "name": self.name, "passed": self.ok, "checked": self.checked,
                "failures": self.failures[:5], "within_time": self.within_time, "details": self.details}


def _timed(number: int, name: str, limit: Optional[float], body: Callable[[], tuple]) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        checked, failures, details = body()
    except IwamodError as exc:
        checked, failures, details = 0, [f"{type(exc).__name__}: {exc}"], {}
    res = CriterionResult(number, name, not failures and checked > 0, checked, failures,
                          time.perf_counter() - t0, limit, details)
    return res


# --- 1. Weierstrass reconstruction ----------------------------------------------------

def random_prepared_series(rng: random.Random, ctx: RingContext, mu: int, lam: int) -> PSeries1:
    """p^mu times a series whose first unit coefficient sits at index lam."""
    p, mod = ctx.p, ctx.modulus
    c = []
    for i in range(ctx.m):
        if i < lam:
            x = p * rng.randrange(mod)
        elif i == lam:
            x = rng.randrange(1, p) + p * rng.randrange(mod)
        else:
            x = rng.randrange(mod)
        c.append(x * p ** mu % mod)
    return PSeries1(ctx, c)


def criterion_1(seed: int = DEFAULT_SEED, count: int = 200) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        failures = []
        for i in range(count):
            ctx = RingContext(3 if i % 2 == 0 else 5, 8, 32)
            mu, lam = rng.randint(0, 3), rng.randint(0, 8)
            f = random_prepared_series(rng, ctx, mu, lam)
            w = weierstrass_prepare(f)
            if (w.mu, w.lam) != (mu, lam):
                failures.append(f"#{i}: (mu, lambda) = {(w.mu, w.lam)}, built {(mu, lam)}")
            elif w.reconstruct().coeffs != f.coeffs:
                failures.append(f"#{i}: p^mu * unit * distinguished differs from the input")
            elif any(c % ctx.p for c in w.distinguished[:-1]) or w.distinguished[-1] != 1:
                failures.append(f"#{i}: factor is not distinguished")
        return count, failures, {"series": count}

    return _timed(1, "Weierstrass reconstruction", 5.0, body)


# --- 2 and 9. elementary modules --------------------------------------------------------

def criterion_2_modules(seed: int = DEFAULT_SEED, count: int = 20) -> List[ElementaryModule]:
    """Lambda/(f), f = p^mu * unit * prod (T - p c) or (T - p^2 c); roots avoid every zeta - 1."""
    rng = random.Random(seed + 2)
    ctx = RingContext(3, 12, 32)
    p, mod = ctx.p, ctx.modulus
    out = []
    while len(out) < count:
        mu, lam = rng.randint(0, 1), rng.randint(0, 3)
        if mu == lam == 0:
            continue
        f = [p ** mu]
        for _ in range(lam):
            root = p * rng.randint(1, 4) if rng.random() < 0.7 else p * p * rng.randint(1, 2)
            f = poly.mul(f, [(-root) % mod, 1], mod, ctx.m)
        unit = [1 + p * rng.randrange(3), rng.randrange(9), rng.randrange(9)]
        f = poly.mul(f, unit, mod, ctx.m)
        M = ElementaryModule(ctx, [PSeries1(ctx, f)])
        if all(cotorsion_test(M.factors[0], n) for n in range(4)):
            out.append(M)
    return out


def criterion_2(seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        failures = []
        mods = criterion_2_modules(seed)
        for i, M in enumerate(mods):
            lim = adjoint_via_limit(M, 3)
            closed = adjoint_elementary(M)
            rep = order_report(closed, range(4))
            if list(rep.exponents) != lim.level_exponents:
                failures.append(f"#{i}: orders {lim.level_exponents} vs closed form {list(rep.exponents)}")
                continue
            expected = mu_lambda(M.factors[0])
            if lim.invariants != expected:
                failures.append(f"#{i}: fitted (mu, lambda) {lim.invariants} vs {expected}")
        return len(mods), failures, {"modules": len(mods)}

    return _timed(2, "adjoint limit vs closed form", 30.0, body)


def criterion_9(seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        failures = []
        mods = criterion_2_modules(seed)
        for i, M in enumerate(mods):
            mu, lam = mu_lambda(M.factors[0])
            ex = order_report(M, (1, 2, 3)).exponents
            nus = {e - mu * 3 ** n - lam * n for n, e in zip((1, 2, 3), ex)}
            if len(nus) != 1:
                failures.append(f"#{i}: e_n = {list(ex)} with (mu, lambda) = {(mu, lam)} gives nu in {sorted(nus)}")
        return len(mods), failures, {"modules": len(mods)}

    return _timed(9, "growth formula", None, body)


# --- 3. finite modules ---------------------------------------------------------------

def random_finite_module(rng: random.Random, ctx: RingContext) -> FiniteLevelModule:
    p = ctx.p
    r = rng.randint(1, 3)
    exps = sorted((rng.randint(1, 3) for _ in range(r)), reverse=True)
    G = [[0] * r for _ in range(r)]
    for i in range(r):
        for j in range(r):
            if i == j:
                G[i][j] = 1 + p * rng.randrange(p ** 3)
            elif rng.random() < 0.5:
                # keep gamma well defined on Z/p^{e_j} -> Z/p^{e_i}
                G[i][j] = p ** max(1, exps[i] - exps[j]) * rng.randrange(p ** 3)
    return FiniteLevelModule(ctx, None, exps, G)


def criterion_3(seed: int = DEFAULT_SEED, count: int = 20) -> CriterionResult:
    def body():
        rng = random.Random(seed + 3)
        ctx = RingContext(3, 6, 32)
        failures = []
        for i in range(count):
            N = random_finite_module(rng, ctx)
            lim = adjoint_via_limit(N, 3)
            if not lim.vanishes:
                failures.append(f"#{i}: exps {N.exponents}, image of level 3 in level 0 has order p^{lim.limit_exponents[0]}")
        return count, failures, {"modules": count}

    return _timed(3, "finite modules have vanishing adjoint", None, body)


# --- 4. square presentations ------------------------------------------------------------

def criterion_4_modules(seed: int = DEFAULT_SEED, count: int = 20) -> List[SquarePresentedModule]:
    rng = random.Random(seed + 4)
    ctx = RingContext(3, 8, 16)
    p = ctx.p
    out = []
    while len(out) < count:
        d = rng.randint(1, 3)
        A = []
        for i in range(d):
            row = []
            for j in range(d):
                if i == j:
                    c = [(-p * rng.randint(1, 3)) % ctx.modulus, 1] if rng.random() < 0.7 else [rng.choice([1, p, p * p])]
                else:
                    c = [p * rng.randrange(-2, 3), rng.randrange(-1, 2)] if rng.random() < 0.5 else [0]
                row.append(PSeries1(ctx, c))
            A.append(row)
        det = determinant(A)
        if det.is_zero():
            continue
        try:
            if not all(cotorsion_test(det, n) for n in range(3)):
                continue
        except IwamodError:
            continue
        out.append(SquarePresentedModule(ctx, A))
    return out


def criterion_4(seed: int = DEFAULT_SEED) -> CriterionResult:
    def body():
        failures = []
        mods = criterion_4_modules(seed)
        checks = 0
        for i, M in enumerate(mods):
            for n in range(3):
                rep = verify_prop_111(M, n)
                checks += 1
                if not rep.holds:
                    failures.append(f"#{i} level {n}: {rep.left_exponent} vs {rep.adjoint_coinvariant_exponent} {rep.failures}")
        return checks, failures, {"modules": len(mods), "level_checks": checks}

    return _timed(4, "finite-level adjoint order identity", None, body)


# --- 5. square order ----------------------------------------------------------------

def criterion_5(max_exponent: int = 6) -> CriterionResult:
    def body():
        results = exhaustive_square_search(3, max_exponent)
        failures = []
        total = nondeg = 0
        for r in results:
            total += r.forms
            nondeg += r.nondegenerate
            if r.counterexamples or r.route_mismatches or r.witnesses != r.nondegenerate:
                failures.append(f"group {r.group}: {r.counterexamples} counterexamples, "
                                f"{r.route_mismatches} route mismatches, {r.witnesses}/{r.nondegenerate} witnesses")
            if r.nondegenerate and sum(r.group) % 2:
                failures.append(f"group {r.group}: odd order carries a nondegenerate alternating form")
        return len(results), failures, {"groups": len(results), "forms": total, "nondegenerate": nondeg}

    return _timed(5, "square order of alternating forms", 60.0, body)


# --- 6. functional equation ---------------------------------------------------------

def criterion_6(seed: int = DEFAULT_SEED, count: int = 20) -> CriterionResult:
    def body():
        rng = random.Random(seed + 6)
        ctx = RingContext(3, 10, 32)
        p, mod = ctx.p, ctx.modulus
        failures = []
        checked = 0

        def S(c):
            return PSeries1(ctx, c)

        sym = {"p": (S([p]), 1), "T": (S([0, 1]), -1), "T^2": (S([0, 0, 1]), 1), "T^3": (S([0, 0, 0, 1]), -1)}
        for k in range(3):
            g = S([(-p * rng.randint(1, 4)) % mod, 1] + [p * rng.randrange(3)] * rng.randint(0, 1))
            sym[f"g{k}*iota(g{k})"] = (g * involution(g), 1)
        for name, (f, eps) in sym.items():
            checked += 1
            fe = functional_equation_check(f)
            if not fe.holds or fe.epsilon != eps:
                failures.append(f"{name}: holds={fe.holds} eps={fe.epsilon}, expected {eps}")
        names = list(sym)
        for i, x in enumerate(names):
            for y in names[i:]:
                fx, ex = sym[x]
                fy, ey = sym[y]
                prod = fx * fy
                try:
                    fe = functional_equation_check(prod)
                except IwamodError:
                    continue
                checked += 1
                if not fe.holds or fe.epsilon != ex * ey:
                    failures.append(f"({x})({y}): eps={fe.epsilon}, expected {ex * ey}")
        for i in range(count):
            k = rng.randint(1, 3)
            f = [1]
            for _ in range(k):
                f = poly.mul(f, [(-p * rng.randint(1, 9)) % mod, 1], mod, ctx.m)
            fe = functional_equation_check(S(f))
            checked += 1
            if fe.holds:
                failures.append(f"asymmetric #{i} {f[:k + 1]} reported symmetric")
        return checked, failures, {"symmetric": len(sym), "asymmetric": count}

    return _timed(6, "functional equation detector", None, body)


# --- 7. Guo's lemma and parity --------------------------------------------------------

def criterion_7() -> CriterionResult:
    def body():
        ctx = RingContext(3, 6, 4)
        h = 4
        const2 = lambda n: 2
        grow = lambda n: n + 1
        grow_slow = lambda n: min(n + 1, 2) + max(0, n - 1)
        towers = [
            ("constant", cyclic_tower(ctx, const2, h), 0),
            ("growing", cyclic_tower(ctx, grow, h), 1),
            ("growing from level 1", cyclic_tower(ctx, grow_slow, h), 1),
            ("zero", cyclic_tower(ctx, lambda n: 0, h), 0),
            ("constant + growing", direct_sum_systems([cyclic_tower(ctx, const2, h), cyclic_tower(ctx, grow, h)]), 1),
            ("growing + growing", direct_sum_systems([cyclic_tower(ctx, grow, h), cyclic_tower(ctx, lambda n: n + 2, h)]), 2),
            ("constant + constant", direct_sum_systems([cyclic_tower(ctx, const2, h), cyclic_tower(ctx, lambda n: 1, h)]), 0),
            ("symplectic growing", symplectic_tower(ctx, grow, h), 2),
            ("symplectic constant", symplectic_tower(ctx, const2, h), 0),
            ("symplectic sum", direct_sum_systems([symplectic_tower(ctx, grow, h), symplectic_tower(ctx, const2, h)]), 2),
            ("three growing", direct_sum_systems([cyclic_tower(ctx, grow, h)] * 2 + [cyclic_tower(ctx, const2, h)]), 2),
        ]
        failures = []
        for name, sys_, want in towers:
            got = guo_rank(sys_, h).unbounded_count
            if got != want:
                failures.append(f"{name}: guo_rank {got}, constructed {want}")
        sympl = [t for t in towers if t[1].forms]
        sympl.append(("symplectic sum of three", direct_sum_systems(
            [symplectic_tower(ctx, grow, h), symplectic_tower(ctx, const2, h), symplectic_tower(ctx, lambda n: 1, h)]), 2))
        for name, sys_, want in sympl:
            v = parity_check(sys_, h)
            if not v.passed or v.rank != want or not v.even:
                failures.append(f"{name}: parity verdict {v.to_dict()}")
        odd = zero_form_tower(ctx, grow, h)
        v = parity_check(odd, h)
        if v.passed or not v.refused:
            failures.append("odd cyclic tower with zero form was not refused")
        return len(towers) + len(sympl) + 1, failures, {"systems": len(towers), "parity_systems": len(sympl) + 1}

    return _timed(7, "Guo rank and parity", None, body)


# --- 8. lambda congruence -------------------------------------------------------------

def lambda_examples(ctx: RingContext):
    p = ctx.p
    T2 = PSeries2(ctx, [[0, 1]])
    P = PSeries2(ctx, [[p]])
    line = PSeries2(ctx, [[0, ctx.modulus - 1], [1]])
    return [
        ("T2", ElementaryModule(ctx, [T2]), lambda n: p ** n),
        ("p", ElementaryModule(ctx, [P]), lambda n: 0),
        ("(1+T1)-(1+T2)", ElementaryModule(ctx, [line]), lambda n: 1),
    ]


def criterion_8() -> CriterionResult:
    def body():
        ctx = RingContext(3, 8, 12, 2)
        failures = []
        details = {}
        for name, M, closed in lambda_examples(ctx):
            rep = lambda_congruence_check(M, (0, 1, 2))
            details[name] = rep.lambdas
            want = {n: closed(n) for n in (0, 1, 2)}
            if dict(rep.lambdas) != want:
                failures.append(f"{name}: lambda_n {rep.lambdas}, closed form {want}")
            if not rep.holds:
                failures.append(f"{name}: congruence mod p - 1 fails")
        return 3, failures, {k: {str(n): v for n, v in d.items()} for k, d in details.items()}

    return _timed(8, "lambda congruence", 120.0, body)


# --- 10. admissibility ----------------------------------------------------------------

def criterion_10() -> CriterionResult:
    def body():
        failures = []
        ctx = RingContext(3, 8, 16)
        res = admissible_twist_search(PSeries1(ctx, [0, 1]), Character.of(ctx, 1 + ctx.p), range(0, 4), 2)
        if res.value != 1 or res.rejected != (0,):
            failures.append(f"twist search returned k = {res.value}, rejected {res.rejected}")
        ctx2 = RingContext(3, 8, 16, 2)
        F = PSeries2(ctx2, [[0, ctx2.modulus - 1], [1]])
        res2 = admissible_line_search(F, range(1, 4), 2)
        if res2.value != 2 or res2.rejected != (1,):
            failures.append(f"line search returned b = {res2.value}, rejected {res2.rejected}")
        return 2, failures, {"twist": res.value, "line": res2.value}

    return _timed(10, "admissibility searches", None, body)


CRITERIA = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run_criteria(numbers: Optional[Sequence[int]] = None, seed: int = DEFAULT_SEED) -> List[CriterionResult]:
    out = []
    for k in numbers or sorted(CRITERIA):
        fn = CRITERIA[k]
        try:
            out.append(fn(seed) if "seed" in fn.__code__.co_varnames else fn())
        except Exception as exc:  # a crash is a failed criterion, not a crashed suite
            out.append(CriterionResult(k, fn.__name__, False, 0, [f"{type(exc).__name__}: {exc}"]))
    return out

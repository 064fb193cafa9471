"""Command-line driver: ``iwamod <command> DESCRIPTOR [flags]``.

Exit codes: 0 success, 1 a verification failed, 2 input error.
The report body is deterministic; timings only appear on stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Dict, List, Optional, Sequence

from . import acceptance
from .adjoint import (
    adjoint_elementary,
    adjoint_presented,
    adjoint_via_limit,
    no_finite_submodule_check,
    verify_prop_111,
)
from .descriptors import Descriptor, DescriptorError, load_descriptor
from .errors import ContextMismatch, IwamodError, PrecisionError, PreconditionError
from .finite import FiniteLevelModule
from .modules import (
    DottedModule,
    ElementaryModule,
    InfiniteAtPrecision,
    SquarePresentedModule,
    char_series,
    coinvariants_at_level,
    determinant,
    fit_growth,
)
from .pairing import (
    FiniteForm,
    SesquiForm,
    alternating_square_order,
    check_axioms,
    form_nondegeneracy,
    functional_equation_check,
    specialize_height,
    specialize_torsion,
)
from .parity import divisor_profile, guo_rank, lambda_congruence_check, parity_check
from .series import PSeries2, mu_lambda, weierstrass_prepare

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


@dataclass
class Report:
    command: str
    items: List[dict] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    def add(self, item: dict, failed: Optional[str] = None):
        self.items.append(item)
        if failed:
            self.failures.append(failed)
            item["verdict"] = "FAIL"
        else:
            item.setdefault("verdict", "ok")

    @property
    def exit_code(self) -> int:
        return EXIT_FAIL if self.failures else EXIT_OK

    def summary(self) -> dict:
        return {"command": self.command, "items": self.items, "failures": self.failures,
                "passed": not self.failures}

    def text(self) -> str:
        lines = [f"iwamod {self.command}"]
        for item in self.items:
            head = item.get("name", "")
            lines.append(f"* {head} [{item['verdict']}]")
            for k in sorted(item):
                if k in ("name", "verdict"):
                    continue
                lines.append(f"    {k}: {json.dumps(item[k], sort_keys=True, default=str)}")
        lines.append(f"result: {'PASS' if not self.failures else 'FAIL'} ({len(self.failures)} failed)")
        for f in self.failures:
            lines.append(f"  failed: {f}")
        return "\n".join(lines)


def parse_levels(text: Optional[str]) -> Optional[List[int]]:
    if text is None:
        return None
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if "-" in part:
                lo, hi = part.split("-")
                out.extend(range(int(lo), int(hi) + 1))
            elif part:
                out.append(int(part))
    except ValueError as exc:
        raise InputError(f"--levels: cannot parse {text!r}") from exc
    if not out or min(out) < 0:
        raise InputError("--levels: need nonnegative integers")
    return sorted(set(out))


def _levels(desc: Descriptor, flag: Optional[List[int]], default: Sequence[int] = (0, 1, 2, 3)) -> List[int]:
    if flag is not None:
        return flag
    lv = desc.params.get("levels")
    if lv is not None:
        return sorted(set(int(x) for x in lv))
    p, m = desc.ctx.p, desc.ctx.m
    return [n for n in default if p ** n < m]


def _expect(raw: dict, got: dict) -> Optional[str]:
    """Compare optional ``expect`` entries of a descriptor item against computed values."""
    want = raw.get("expect") if isinstance(raw, dict) else None
    if not want:
        return None
    bad = [f"{k}: expected {v!r}, got {got.get(k)!r}" for k, v in sorted(want.items()) if got.get(k) != v]
    return "; ".join(bad) or None


def _raw_modules(desc: Descriptor) -> List[dict]:
    mods = list(desc.raw.get("modules", []))
    if "module" in desc.raw:
        mods = [desc.raw["module"]] + mods
    return mods


def _module_series(M):
    if isinstance(M, DottedModule):
        return _module_series(M.base)
    if isinstance(M, ElementaryModule):
        return list(M.factors)
    if isinstance(M, SquarePresentedModule):
        return [determinant(M.matrix)]
    return []


# --- subcommands ------------------------------------------------------------------

def cmd_prepare(desc: Descriptor, args) -> Report:
    rep = Report("prepare")
    for name, M, raw in zip(desc.module_names, desc.modules, _raw_modules(desc)):
        for k, f in enumerate(_module_series(M)):
            item = {"name": f"{name}.factor[{k}]" if isinstance(M, ElementaryModule) else f"{name}.det"}
            if isinstance(f, PSeries2):
                item["skipped"] = "two-variable series"
                rep.add(item)
                continue
            try:
                w = weierstrass_prepare(f)
            except PrecisionError as exc:
                item["undetermined"] = str(exc)
                rep.add(item)
                continue
            ok = w.reconstruct().coeffs == f.coeffs
            item.update({"mu": w.mu, "lambda": w.lam, "distinguished": list(w.distinguished),
                         "unit": w.unit.poly(), "precision": w.precision, "reconstructs": ok,
                         "qualifier": f.ctx.qualifier()})
            fail = None if ok else f"{item['name']}: reconstruction differs from input"
            fail = fail or _expect(raw, {"mu": w.mu, "lambda": w.lam})
            rep.add(item, fail)
    return rep


def _coinv_structure(M, n):
    c = coinvariants_at_level(M, n)
    if isinstance(c, InfiniteAtPrecision):
        return None, {"level": n, "infinite": True}
    return c.order_exponent, {"level": n, "exponents": list(c.exponents)}


def cmd_coinv(desc: Descriptor, args) -> Report:
    rep = Report("coinv")
    levels = _levels(desc, args.levels)
    for name, M, raw in zip(desc.module_names, desc.modules, _raw_modules(desc)):
        item = {"name": name, "qualifier": desc.ctx.qualifier(levels=levels)}
        rows, exps = [], []
        for n in levels:
            e, row = _coinv_structure(M, n)
            rows.append(row)
            exps.append(e)
        item["levels"] = rows
        item["order_exponents"] = exps
        fin = [(n, e) for n, e in zip(levels, exps) if e is not None]
        if len(fin) >= 3 and [n for n, _ in fin[-3:]] == list(range(fin[-3][0], fin[-3][0] + 3)):
            try:
                g = fit_growth(desc.ctx.p, [n for n, _ in fin], [e for _, e in fin])
                item["growth"] = {"mu": g.mu, "lambda": g.lam, "nu": g.nu, "residual": list(g.residual)}
            except (PrecisionError, PreconditionError) as exc:
                item["growth"] = {"undetermined": str(exc)}
        rep.add(item, _expect(raw, {"order_exponents": exps}))
    return rep


def cmd_adjoint(desc: Descriptor, args) -> Report:
    rep = Report("adjoint")
    n_max = max(_levels(desc, args.levels)) if args.levels or "levels" in desc.params else int(desc.params.get("n_max", 3))
    for name, M, raw in zip(desc.module_names, desc.modules, _raw_modules(desc)):
        item = {"name": name}
        lim = adjoint_via_limit(M, n_max)
        item["limit"] = lim.summary()
        fails = []
        if isinstance(M, FiniteLevelModule):
            item["closed_form"] = {"adjoint_order_exponents": [0] * (n_max + 1)}
            if not lim.vanishes:
                fails.append("finite module: adjoint image at level 0 is nonzero")
        else:
            closed = adjoint_elementary(M) if isinstance(M, ElementaryModule) else adjoint_presented(M)
            exps = [coinvariants_at_level(closed, n).order_exponent for n in range(n_max + 1)]
            inv = list(mu_lambda(char_series(M)))
            item["closed_form"] = {"order_exponents": exps, "mu_lambda": inv}
            if exps != lim.level_exponents:
                fails.append(f"limit orders {lim.level_exponents} != closed form {exps}")
            if lim.invariants is not None and list(lim.invariants) != inv:
                fails.append(f"limit (mu, lambda) {list(lim.invariants)} != {inv}")
            props = [verify_prop_111(M, n) for n in range(n_max + 1)]
            item["order_identity"] = [{"level": r.level, "holds": r.holds, "left": r.left_exponent,
                                       "right": r.adjoint_coinvariant_exponent} for r in props]
            fails += [f"order identity fails at level {r.level}" for r in props if r.holds is False]
        try:
            item["no_finite_submodule"] = no_finite_submodule_check(lim)
        except PrecisionError as exc:
            item["no_finite_submodule"] = f"undetermined: {exc}"
        if item["no_finite_submodule"] is False:
            fails.append("a finite submodule survives in the limit")
        exp = _expect(raw, {"limit_exponents": lim.limit_exponents, "level_exponents": lim.level_exponents,
                            "mu_lambda": item["limit"]["mu_lambda"]})
        if exp:
            fails.append(exp)
        rep.add(item, f"{name}: " + "; ".join(fails) if fails else None)
    return rep


def _pair_sesqui(desc, i, form: SesquiForm, raw: dict, levels) -> tuple:
    item = {"name": raw.get("name", f"form{i}")}
    fails = []
    wd = form.well_definedness_failures()
    item["well_defined"] = not wd
    if wd:
        fails.append(f"not well defined at entry {wd[0][:2]}")
        return item, fails
    partner = raw.get("partner")
    if partner is not None:
        if not 0 <= partner < len(desc.forms):
            raise InputError(f"forms[{i}].partner: index out of range")
        ax = check_axioms(form, desc.forms[partner], claims=["swap"])
        item["swap"] = ax.results.get("swap")
        if not ax.passed:
            fails.append("swap symmetry fails")
    spec = []
    for n in levels:
        row = {"level": n}
        try:
            t = specialize_torsion(form, n)
        except IwamodError as exc:
            row["torsion"] = f"{type(exc).__name__}: {exc}"
        else:
            nd = form_nondegeneracy(t)
            ax = check_axioms(t, claims=["bilinear", "galois"])
            row.update({"matrix": [[list(v) for v in r] for r in t.serialized()],
                        "nondegenerate": nd.nondegenerate, "left_kernel": nd.left_kernel_exponents,
                        "right_kernel": nd.right_kernel_exponents, "axioms": ax.results})
            if not ax.passed:
                fails.append(f"level {n}: axioms {ax.results}")
        if raw.get("height"):
            try:
                h = specialize_height(form, n, int(raw.get("generator_unit", 1)))
                row["height"] = h.to_dict()
                if not h.agree:
                    fails.append(f"level {n}: height routes disagree")
            except IwamodError as exc:
                row["height"] = f"{type(exc).__name__}: {exc}"
        spec.append(row)
    item["specializations"] = spec
    got = {"nondegenerate": [r.get("nondegenerate") for r in spec]}
    e = _expect(raw, got)
    if e:
        fails.append(e)
    return item, fails


def _pair_finite(i, form: FiniteForm, raw: dict) -> tuple:
    item = {"name": raw.get("name", f"form{i}")}
    fails = []
    claims = [k for k in ("galois", "alternating", "symmetric") if getattr(form, k)] + ["bilinear"]
    ax = check_axioms(form, claims=claims)
    item["axioms"] = ax.results
    if not ax.passed:
        fails.append(f"axioms {ax.to_dict()['counterexamples']}")
    nd = form_nondegeneracy(form)
    item["nondegeneracy"] = {"nondegenerate": nd.nondegenerate, "left_kernel": nd.left_kernel_exponents,
                             "right_kernel": nd.right_kernel_exponents, "cokernel_exponent": nd.cokernel_exponent}
    if form.alternating and nd.nondegenerate and form.N is form.Np:
        w = alternating_square_order(form.N, form)
        item["square_order"] = w.to_dict()
        if not w.square:
            fails.append("nondegenerate alternating form on a group of non-square order")
    e = _expect(raw, {"nondegenerate": nd.nondegenerate})
    if e:
        fails.append(e)
    return item, fails


def cmd_pair(desc: Descriptor, args) -> Report:
    rep = Report("pair")
    levels = _levels(desc, args.levels, (0, 1, 2))
    raws = desc.raw.get("forms", [])
    for i, (form, raw) in enumerate(zip(desc.forms, raws)):
        if isinstance(form, SesquiForm):
            item, fails = _pair_sesqui(desc, i, form, raw, levels)
        else:
            item, fails = _pair_finite(i, form, raw)
        rep.add(item, f"{item['name']}: " + "; ".join(fails) if fails else None)
    return rep


def cmd_funceq(desc: Descriptor, args) -> Report:
    rep = Report("funceq")
    for name, M, raw in zip(desc.module_names, desc.modules, _raw_modules(desc)):
        for k, f in enumerate(_module_series(M)):
            item = {"name": f"{name}.factor[{k}]"}
            try:
                fe = functional_equation_check(f)
            except PrecisionError as exc:
                item["undetermined"] = str(exc)
                rep.add(item)
                continue
            item.update(fe.to_dict())
            e = _expect(raw, {"holds": fe.holds, "epsilon": fe.epsilon})
            rep.add(item, f"{item['name']}: {e}" if e else None)
    return rep


def cmd_parity(desc: Descriptor, args) -> Report:
    rep = Report("parity")
    raws = desc.raw.get("systems", [])
    for i, (sys_, raw) in enumerate(zip(desc.systems, raws)):
        item = {"name": raw.get("name", f"system{i}")}
        h = sys_.horizon
        if args.levels:
            h = min(h, max(args.levels))
        item["profiles"] = [list(divisor_profile(sys_, n)) for n in range(h + 1)]
        fails = []
        try:
            r = guo_rank(sys_, h)
            item["guo_rank"] = r.to_dict()
            rank = r.unbounded_count
        except PrecisionError as exc:
            item["guo_rank"] = f"undetermined: {exc}"
            rank = None
        if sys_.forms:
            v = parity_check(sys_, h)
            item["parity"] = v.to_dict()
            if not v.refused and not v.passed:
                fails.append("odd rank under a quasi-nondegenerate alternating form")
        e = _expect(raw, {"rank": rank, "parity_passed": item.get("parity", {}).get("passed")})
        if e:
            fails.append(e)
        rep.add(item, f"{item['name']}: " + "; ".join(fails) if fails else None)
    levels = _levels(desc, args.levels, (0, 1, 2))
    for name, M, raw in zip(desc.module_names, desc.modules, _raw_modules(desc)):
        if not (isinstance(M, ElementaryModule) and M.two_variable):
            continue
        lc = lambda_congruence_check(M, levels)
        item = {"name": name, "lambda_congruence": lc.to_dict()}
        fails = [] if lc.holds else ["lambda_n not congruent mod p - 1"]
        e = _expect(raw, {"lambdas": {str(k): v for k, v in lc.lambdas.items()}})
        if e:
            fails.append(e)
        rep.add(item, f"{name}: " + "; ".join(fails) if fails else None)
    return rep


COMMANDS: Dict[str, Callable[[Descriptor, argparse.Namespace], Report]] = {
    "prepare": cmd_prepare,
    "coinv": cmd_coinv,
    "adjoint": cmd_adjoint,
    "pair": cmd_pair,
    "funceq": cmd_funceq,
    "parity": cmd_parity,
}


def corpus_files(path: Optional[str] = None) -> List[str]:
    if path is None:
        root = resources.files("iwamod") / "corpus"
        path = str(root)
    if os.path.isfile(path):
        return [path]
    return sorted(os.path.join(path, f) for f in os.listdir(path) if f.endswith(".json"))


def cmd_suite(args) -> Report:
    rep = Report("suite")
    for f in corpus_files(args.corpus):
        desc = load_descriptor(f, args.precision, args.truncation)
        cmd = desc.command
        if cmd not in COMMANDS:
            raise DescriptorError(f"unknown command {cmd!r}", f"{os.path.basename(f)}: command")
        sub = COMMANDS[cmd](desc, argparse.Namespace(levels=None))
        rep.add({"name": f"corpus/{os.path.basename(f)}", "command": cmd, "items": len(sub.items),
                 "failures": sub.failures}, f"{os.path.basename(f)}: {sub.failures}" if sub.failures else None)
    if not args.corpus_only:
        numbers = args.criteria or sorted(acceptance.CRITERIA)
        for r in acceptance.run_criteria(numbers, args.seed):
            print(r.line(), file=sys.stderr)
            d = r.to_dict()
            d["name"] = f"criterion {r.number}: {r.name}"
            rep.add(d, f"criterion {r.number}: {r.failures[:1] or 'time limit exceeded'}" if not r.ok else None)
    return rep


# --- entry point ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="iwamod", description="Computations with modules over Iwasawa algebras.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, help="override the p-adic precision a")
    common.add_argument("--truncation", type=int, help="override the T-adic truncation m")
    common.add_argument("--levels", help="levels, e.g. 0,1,2 or 0-3")
    common.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED, help="seed for randomized suites")
    common.add_argument("--format", choices=("text", "summary"), default="text")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "prepare": "Weierstrass data of each characteristic series",
        "coinv": "coinvariant towers and growth fits",
        "adjoint": "adjoint as a limit, with the closed-form cross-check",
        "pair": "pairing specializations, axioms, square order",
        "funceq": "functional equation and its sign",
        "parity": "Guo rank, parity and lambda congruence",
    }
    for name, h in helps.items():
        sp = sub.add_parser(name, parents=[common], help=h)
        sp.add_argument("descriptor")
    sp = sub.add_parser("suite", parents=[common], help="run the shipped corpus and the acceptance criteria")
    sp.add_argument("--corpus", help="descriptor file or directory (default: shipped corpus)")
    sp.add_argument("--criteria", type=lambda s: [int(x) for x in s.split(",")], help="subset, e.g. 1,2,7")
    sp.add_argument("--corpus-only", action="store_true", help="skip the acceptance criteria")
    return ap


def emit(rep: Report, fmt: str, out=None):
    out = out or sys.stdout
    if fmt == "text":
        print(rep.text(), file=out)
        print("--- summary ---", file=out)
    print(json.dumps(rep.summary(), sort_keys=True, indent=2, default=str), file=out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.levels = parse_levels(args.levels)
        if args.criteria and any(k not in acceptance.CRITERIA for k in args.criteria or []):
            raise InputError("--criteria: numbers must lie in 1..10")
    except AttributeError:
        pass
    except InputError as exc:
        print(f"iwamod: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        if args.command == "suite":
            rep = cmd_suite(args)
        else:
            desc = load_descriptor(args.descriptor, args.precision, args.truncation)
            rep = COMMANDS[args.command](desc, args)
    except (DescriptorError, InputError) as exc:
        print(f"iwamod: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PreconditionError, ContextMismatch) as exc:
        detail = getattr(exc, "detail", {})
        print(f"iwamod: precondition failed: {exc}" + (f" {detail}" if detail else ""), file=sys.stderr)
        return EXIT_INPUT
    emit(rep, args.format)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())

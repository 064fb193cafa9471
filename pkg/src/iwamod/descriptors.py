"""JSON descriptors: ring context plus module, form and system payloads."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from .errors import IwamodError
from .finite import FiniteLevelModule
from .modules import DottedModule, ElementaryModule, SquarePresentedModule
from .padic import RingContext
from .pairing import FiniteForm, FracModElement, SesquiForm
from .parity import ProjectiveSystem, coinvariant_system
from .series import PSeries1, PSeries2


class DescriptorError(IwamodError, ValueError):
    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass
class Descriptor:
    ctx: RingContext
    raw: dict
    modules: List[Any] = field(default_factory=list)
    module_names: List[str] = field(default_factory=list)
    forms: List[Any] = field(default_factory=list)
    systems: List[ProjectiveSystem] = field(default_factory=list)
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def command(self) -> Optional[str]:
        return self.raw.get("command")


def _req(d: dict, key: str, path: str):
    if not isinstance(d, dict):
        raise DescriptorError("expected an object", path)
    if key not in d:
        raise DescriptorError(f"missing field '{key}'", path)
    return d[key]


def _int(x, path: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise DescriptorError(f"expected an integer, got {x!r}", path)
    return x


def _int_list(x, path: str) -> List[int]:
    if not isinstance(x, list):
        raise DescriptorError("expected a list of integers", path)
    return [_int(v, f"{path}[{i}]") for i, v in enumerate(x)]


def parse_ring(d: dict, precision: Optional[int] = None, truncation: Optional[int] = None) -> RingContext:
    r = _req(d, "ring", "")
    p = _int(_req(r, "p", "ring"), "ring.p")
    if precision is not None:
        a = precision
    else:
        key = "precision" if "precision" in r or "a" not in r else "a"
        a = _int(_req(r, key, "ring"), f"ring.{key}")
    if truncation is not None:
        m = truncation
    else:
        key = "m" if "m" in r else "truncation"
        m = _int(r.get(key, 16), f"ring.{key}")
    v = _int(r.get("vars", 1), "ring.vars")
    try:
        return RingContext(p, a, m, v)
    except (ValueError, TypeError) as exc:
        raise DescriptorError(str(exc), "ring") from exc


def parse_series(ctx: RingContext, x, path: str):
    if isinstance(x, list) and x and all(isinstance(r, list) for r in x):
        return PSeries2(ctx, [_int_list(r, f"{path}[{i}]") for i, r in enumerate(x)])
    return PSeries1(ctx, _int_list(x, path))


def _exponent_of(order: int, p: int, path: str) -> int:
    if order < 1:
        raise DescriptorError(f"order {order} is not a power of p", path)
    e = 0
    while order % p == 0:
        order //= p
        e += 1
    if order != 1:
        raise DescriptorError(f"order is not a power of p = {p}", path)
    return e


def parse_module(ctx: RingContext, d: dict, path: str):
    kind = _req(d, "kind", path)
    try:
        if kind == "elementary":
            fs = _req(d, "factors", path)
            if not isinstance(fs, list):
                raise DescriptorError("factors must be a list", f"{path}.factors")
            M = ElementaryModule(ctx, [parse_series(ctx, f, f"{path}.factors[{i}]") for i, f in enumerate(fs)])
        elif kind == "square":
            mat = _req(d, "matrix", path)
            if not isinstance(mat, list):
                raise DescriptorError("matrix must be a list of rows", f"{path}.matrix")
            rows = [[PSeries1(ctx, _int_list(c, f"{path}.matrix[{i}][{j}]")) for j, c in enumerate(r)]
                    for i, r in enumerate(mat)]
            M = SquarePresentedModule(ctx, rows)
        elif kind == "finite":
            orders = _int_list(_req(d, "orders", path), f"{path}.orders")
            exps = [_exponent_of(o, ctx.p, f"{path}.orders[{i}]") for i, o in enumerate(orders)]
            action = d.get("action")
            if action is not None:
                action = [_int_list(r, f"{path}.action[{i}]") for i, r in enumerate(action)]
            level = d.get("level")
            M = FiniteLevelModule(ctx, level, exps, action)
        else:
            raise DescriptorError(f"unknown module kind {kind!r}", f"{path}.kind")
    except DescriptorError:
        raise
    except (IwamodError, ValueError) as exc:
        raise DescriptorError(str(exc), path) from exc
    if d.get("dotted"):
        M = DottedModule(M)
    return M


def parse_value(v, p: int, path: str) -> Fraction:
    """A Q_p/Z_p value given as [numerator, k] (numerator / p^k) or as "n/d"."""
    if isinstance(v, list) and len(v) == 2:
        return Fraction(_int(v[0], path), p ** _int(v[1], path))
    if isinstance(v, (int, str)):
        try:
            return Fraction(v)
        except ValueError as exc:
            raise DescriptorError(str(exc), path) from exc
    raise DescriptorError("expected [numerator, k]", path)


def _module_ref(desc_modules, x, path):
    i = _int(x, path)
    if not 0 <= i < len(desc_modules):
        raise DescriptorError(f"module index {i} out of range", path)
    return desc_modules[i]


def parse_form(ctx: RingContext, modules: list, d: dict, path: str):
    kind = d.get("kind", "sesqui")
    left = _module_ref(modules, _req(d, "left", path), f"{path}.left")
    right = _module_ref(modules, d.get("right", d["left"]), f"{path}.right")
    mat = _req(d, "matrix", path)
    try:
        if kind == "sesqui":
            ent = [[FracModElement(PSeries1(ctx, _int_list(_req(e, "num", f"{path}.matrix[{i}][{j}]"), f"{path}.matrix[{i}][{j}].num")),
                                   PSeries1(ctx, _int_list(_req(e, "den", f"{path}.matrix[{i}][{j}]"), f"{path}.matrix[{i}][{j}].den")))
                    for j, e in enumerate(r)] for i, r in enumerate(mat)]
            return SesquiForm(left, right, ent)
        if kind == "finite":
            B = [[parse_value(v, ctx.p, f"{path}.matrix[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(mat)]
            flags = d.get("flags", {})
            return FiniteForm(left, right, B, galois=bool(flags.get("galois")),
                              alternating=bool(flags.get("alternating")), symmetric=bool(flags.get("symmetric")))
    except DescriptorError:
        raise
    except (IwamodError, ValueError, TypeError) as exc:
        raise DescriptorError(str(exc), path) from exc
    raise DescriptorError(f"unknown form kind {kind!r}", f"{path}.kind")


def parse_system(ctx: RingContext, modules: list, d: dict, path: str) -> ProjectiveSystem:
    try:
        if "module" in d:
            M = _module_ref(modules, d["module"], f"{path}.module")
            return coinvariant_system(M, _int(d.get("horizon", 3), f"{path}.horizon"))
        lv = _req(d, "levels", path)
        levels = []
        for i, L in enumerate(lv):
            orders = _int_list(_req(L, "orders", f"{path}.levels[{i}]"), f"{path}.levels[{i}].orders")
            exps = [_exponent_of(o, ctx.p, f"{path}.levels[{i}].orders[{k}]") for k, o in enumerate(orders)]
            levels.append(FiniteLevelModule(ctx, 0, exps, check=False))
        trans = [[_int_list(r, f"{path}.transitions[{i}][{k}]") for k, r in enumerate(t)]
                 for i, t in enumerate(d.get("transitions", []))]
        forms = None
        if "forms" in d:
            forms = []
            for i, fm in enumerate(d["forms"]):
                B = [[parse_value(v, ctx.p, f"{path}.forms[{i}][{r}][{c}]") for c, v in enumerate(row)]
                     for r, row in enumerate(fm)]
                forms.append(FiniteForm(levels[i], levels[i], B, alternating=True))
        bounds = d.get("kernel_bounds")
        if bounds is not None:
            bounds = _int_list(bounds, f"{path}.kernel_bounds")
        return ProjectiveSystem(ctx, levels, trans, forms, bounds)
    except DescriptorError:
        raise
    except (IwamodError, ValueError, TypeError, IndexError) as exc:
        raise DescriptorError(str(exc), path) from exc


def parse_descriptor(data: dict, precision: Optional[int] = None, truncation: Optional[int] = None) -> Descriptor:
    if not isinstance(data, dict):
        raise DescriptorError("top level must be an object")
    ctx = parse_ring(data, precision, truncation)
    desc = Descriptor(ctx, data, params=dict(data.get("params", {})))
    mods = data.get("modules", [])
    if "module" in data:
        mods = [data["module"]] + list(mods)
    if not isinstance(mods, list):
        raise DescriptorError("modules must be a list", "modules")
    for i, md in enumerate(mods):
        desc.modules.append(parse_module(ctx, md, f"modules[{i}]"))
        desc.module_names.append(str(md.get("name", f"M{i}")) if isinstance(md, dict) else f"M{i}")
    for i, fd in enumerate(data.get("forms", [])):
        desc.forms.append(parse_form(ctx, desc.modules, fd, f"forms[{i}]"))
    for i, sd in enumerate(data.get("systems", [])):
        desc.systems.append(parse_system(ctx, desc.modules, sd, f"systems[{i}]"))
    return desc


def load_descriptor(path: str, precision: Optional[int] = None, truncation: Optional[int] = None) -> Descriptor:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DescriptorError(f"cannot read descriptor: {exc.strerror}", path) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DescriptorError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", path) from exc
    return parse_descriptor(data, precision, truncation)

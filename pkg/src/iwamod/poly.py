"""Low-level coefficient-list arithmetic over Z/mod (lowest degree first)."""
from __future__ import annotations

from math import comb
from typing import List, Optional, Sequence

import numpy as np

_INT64_SAFE = 2 ** 62


def trim(a: Sequence[int]) -> List[int]:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def add(a, b, mod):
    n = max(len(a), len(b))
    return [((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % mod for i in range(n)]


def sub(a, b, mod):
    n = max(len(a), len(b))
    return [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % mod for i in range(n)]


def scale(a, c, mod):
    return [x * c % mod for x in a]


def mul(a: Sequence[int], b: Sequence[int], mod: int, trunc: Optional[int] = None) -> List[int]:
    if not a or not b:
        return []
    if trunc is not None:
        a = a[:trunc]
        b = b[:trunc]
    k = min(len(a), len(b))
    if (mod - 1) ** 2 * k < _INT64_SAFE:
        out = np.convolve(np.asarray(a, dtype=np.int64) % mod, np.asarray(b, dtype=np.int64) % mod)
        res = [int(x) % mod for x in out]
    else:
        res = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    res[i + j] += x * y
        res = [x % mod for x in res]
    if trunc is not None:
        res = res[:trunc]
    return res


def power(a, e, mod, trunc=None):
    result = [1]
    base = list(a)
    while e:
        if e & 1:
            result = mul(result, base, mod, trunc)
        base = mul(base, base, mod, trunc)
        e >>= 1
    return result


def compose(f: Sequence[int], s: Sequence[int], mod: int, trunc: Optional[int] = None) -> List[int]:
    """f(s(T)) by Horner's rule."""
    out: List[int] = []
    for c in reversed(list(f)):
        out = add(mul(out, s, mod, trunc), [c], mod)
    return out


def divmod_monic(g: Sequence[int], P: Sequence[int], mod: int):
    """Polynomial long division by a monic P: g = q P + r with deg r < deg P."""
    P = trim(P)
    d = len(P) - 1
    if d < 0 or P[-1] % mod != 1:
        raise ValueError("divisor must be monic")
    r = [x % mod for x in g]
    if len(r) <= d:
        return [], r + [0] * (d - len(r))
    q = [0] * (len(r) - d)
    for i in range(len(r) - 1, d - 1, -1):
        c = r[i]
        if c:
            q[i - d] = c
            for j in range(d + 1):
                r[i - d + j] = (r[i - d + j] - c * P[j]) % mod
    return q, r[:d]


def reduce_mod(g, P, mod):
    return divmod_monic(g, P, mod)[1]


def omega(p: int, n: int, mod: int) -> List[int]:
    """(1+T)^{p^n} - 1 as an exact coefficient list."""
    N = p ** n
    return [0] + [comb(N, k) % mod for k in range(1, N + 1)]


def inverse_series(u: Sequence[int], mod: int, trunc: int) -> List[int]:
    """Inverse of a power series with unit constant term, mod T^trunc (Newton iteration)."""
    c0 = u[0] % mod
    inv = [pow(c0, -1, mod)]
    k = 1
    while k < trunc:
        k = min(2 * k, trunc)
        e = mul(u[:k], inv, mod, k)
        e = [(-x) % mod for x in e]
        e[0] = (e[0] + 2) % mod
        inv = mul(inv, e, mod, k)
    return (inv + [0] * trunc)[:trunc]


def companion_T(P: Sequence[int], mod: int) -> List[List[int]]:
    """Matrix of multiplication by T on Z/mod[T]/(P), P monic, basis 1..T^{d-1}."""
    d = len(P) - 1
    M = [[0] * d for _ in range(d)]
    for j in range(d - 1):
        M[j + 1][j] = 1
    for i in range(d):
        M[i][d - 1] = (-P[i]) % mod
    return M


def mult_matrix(f: Sequence[int], P: Sequence[int], mod: int) -> List[List[int]]:
    """Matrix of multiplication by f on Z/mod[T]/(P) (columns = images of T^j)."""
    d = len(P) - 1
    fr = reduce_mod(f, P, mod)
    cols = []
    cur = fr
    for _ in range(d):
        cols.append((cur + [0] * d)[:d])
        cur = reduce_mod([0] + cur, P, mod)
    return [list(r) for r in zip(*cols)] if d else []

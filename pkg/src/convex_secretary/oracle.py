"""Brute-force ground truth for small instances."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import FractionalSet, Instance, Line, Number
from .errors import ConfigError, InternalConsistencyError
from .matroid import Matroid
from .offline import fractional_opt

MAX_N = 22
MAX_N_FRACTIONAL = 16
_CHUNK = 1 << 16
_LIMIT = 1 << 62


@dataclass(frozen=True)
class OracleResult:
    best_set: frozenset[int]
    best_profit: Number
    enumerated: int


def _bits(start: int, stop: int, n: int) -> np.ndarray:
    masks = np.arange(start, stop, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)


def brute_force_opt(instance: Instance, m: Matroid | None = None) -> OracleResult:
    """Exact integral optimum by enumerating every subset.

    Independence is checked through per-block counts, so the work per
    subset is a few small matrix products.  Ties go to the
    lexicographically smallest sorted id tuple (so the empty set wins ties at 0).
    """
    m = instance.feasibility if m is None else m
    n = instance.n
    if n > MAX_N:
        raise ConfigError(f"brute force refuses n = {n} > {MAX_N}")
    els = sorted(instance.elements, key=lambda e: e.id)
    ids = [e.id for e in els]
    vals = np.array([e.value for e in els], dtype=object)
    sizes = [[e.sizes[j] for e in els] for j in range(instance.dims)]
    totals = [sum(s) for s in sizes]
    worst = sum(e.value for e in els) + sum(C.total(t) for C, t in zip(instance.costs, totals))
    if worst >= _LIMIT:
        return _brute_force_python(instance, m, ids)
    vals = vals.astype(np.int64)
    S = np.array(sizes, dtype=np.int64).T.reshape(n, instance.dims)
    tables = [np.array([C.total(s) for s in range(t + 1)], dtype=np.int64) for C, t in zip(instance.costs, totals)]
    blocks = m.blocks()
    B = np.zeros((n, len(blocks)), dtype=np.int64)
    for b, part in enumerate(blocks):
        for e in part:
            B[ids.index(e), b] = 1
    caps = np.array([min(m.capacity(b), n) for b in range(len(blocks))], dtype=np.int64)

    best_p, best_sets, count = None, [], 0
    for start in range(0, 1 << n, _CHUNK):
        bits = _bits(start, min(1 << n, start + _CHUNK), n)
        ok = np.all(bits @ B <= caps, axis=1) if len(blocks) else np.ones(len(bits), bool)
        bits = bits[ok]
        count += len(bits)
        if not len(bits):
            continue
        sz = bits @ S
        p = bits @ vals
        for j, tab in enumerate(tables):
            p = p - tab[sz[:, j]]
        top = p.max()
        if best_p is None or top > best_p:
            best_p, best_sets = int(top), []
        if top == best_p:
            best_sets.extend(tuple(i for i, b in zip(ids, row) if b) for row in bits[p == top])
    best = min(best_sets)
    return OracleResult(frozenset(best), best_p, count)


def _brute_force_python(instance: Instance, m: Matroid, ids: list[int]) -> OracleResult:
    from itertools import combinations

    best = (None, ())
    count = 0
    for r in range(len(ids) + 1):
        for combo in combinations(ids, r):
            if not m.is_independent(combo):
                continue
            count += 1
            p = instance.profit(combo)
            if best[0] is None or p > best[0] or (p == best[0] and combo < best[1]):
                best = (p, combo)
    return OracleResult(frozenset(best[1]), best[0], count)


def brute_force_fractional(instance: Instance, integral_only: bool = False) -> tuple[FractionalSet, Number]:
    """Optimal fractional subset by line search over density prefixes, double-checked.

    For every prefix of the density order we try every fraction of the next
    element at which the total size is integral; profit is piecewise linear
    in that fraction with breakpoints exactly there, so this is exact.  The
    answer is cross-checked against a grid four times finer and against the
    greedy :func:`fractional_opt` whenever the pool is restricted to I
    (or when I already is the whole universe).
    """
    if instance.dims != 1:
        raise ConfigError("fractional oracle is single-dimensional")
    if instance.n > MAX_N_FRACTIONAL:
        raise ConfigError(f"fractional oracle refuses n = {instance.n} > {MAX_N_FRACTIONAL}")
    line = Line.of(instance)
    pool = [e for e in line.order if not integral_only or e in line.integral]

    def search(grid: int):
        best = (Fraction(0), {})
        for k in range(len(pool) + 1):
            head = pool[:k]
            base_v = sum(line.value[e] for e in head)
            base_s = sum(line.size[e] for e in head)
            if k == len(pool):
                cand = [(Fraction(0), None)]
            else:
                nxt = pool[k]
                steps = grid * line.size[nxt]
                cand = [(Fraction(j, steps), nxt) for j in range(steps + 1)]
            for a, nxt in cand:
                v = base_v + (a * line.value[nxt] if nxt is not None else 0)
                s = base_s + (a * line.size[nxt] if nxt is not None else 0)
                p = v - line.cost.total(s)
                if p > best[0]:
                    fr = {e: Fraction(1) for e in head}
                    if nxt is not None and a > 0:
                        fr[nxt] = a
                    best = (p, fr)
        return best

    p1, fr = search(1)
    p4, _ = search(4)
    if p1 != p4:
        raise InternalConsistencyError(f"fractional line search {p1} disagrees with fine grid {p4}")
    if integral_only or line.integral == frozenset(line.order):
        greedy = fractional_opt(line).profit
        if greedy != p1:
            raise InternalConsistencyError(f"fractional greedy {greedy} disagrees with line search {p1}")
    return FractionalSet(fr), p1

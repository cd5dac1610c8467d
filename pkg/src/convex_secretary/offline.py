"""Offline algorithms without a feasibility constraint: greedy and fractional optimum."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .core import FractionalSet, Line, LineTracker, Number, as_line


class Which(enum.Enum):
    PREFIX = "prefix"
    SINGLE = "single"


@dataclass(frozen=True)
class GreedyResult:
    chosen: frozenset[int]
    profit: Number
    best_single: int | None
    which: Which
    prefix: tuple[int, ...]  # the greedy density prefix A(U), in density order


def greedy_prefix(line: Line, T: Iterable[int] | None = None) -> list[int]:
    """Integral elements of T in decreasing density, kept while the marginal profit is >= 0."""
    pool = line.order if T is None else line.sort(T)
    tr = LineTracker(line)
    for e in pool:
        if e not in line.integral:
            continue
        if tr.gain(e) < 0:
            break
        tr.add(e)
    return tr.ids


def best_single(line: Line, T: Iterable[int] | None = None) -> int | None:
    pool = line.order if T is None else line.sort(T)
    best = None
    for e in pool:
        if best is None or line.single(e) > line.single(best):
            best = e
    return best


def greedy_offline(instance) -> GreedyResult:
    """Better of the greedy density prefix and the most profitable single element."""
    line = as_line(instance)
    A = greedy_prefix(line)
    pA = line.profit(A)
    m = best_single(line)
    if m is not None and line.single(m) > pA:
        return GreedyResult(frozenset([m]), line.single(m), m, Which.SINGLE, tuple(A))
    return GreedyResult(frozenset(A), pA, m, Which.PREFIX, tuple(A))


@dataclass(frozen=True)
class FractionalOpt(FractionalSet):
    """Optimal fractional subset; also carries its profit and total size s*."""

    profit: Number = 0
    s_star: Number = 0
    order: tuple[int, ...] = ()  # support in density order; only the last may be fractional


def fractional_opt(instance, T: Iterable[int] | None = None) -> FractionalOpt:
    """Optimal fractional subset of T ∩ I under piecewise-linear costs.

    Walk I in decreasing density.  An element goes in whole while the
    marginal cost of its last unit does not exceed its density; otherwise
    we take it up to size s̄(ρ) and stop, since every later element is
    less dense and the next unit already costs more than ρ.
    """
    line = as_line(instance)
    pool = line.order if T is None else line.sort(T)
    C = line.cost
    frac: dict[int, Fraction] = {}
    order = []
    x = 0
    value: Number = 0
    for e in pool:
        if e not in line.integral:
            continue
        s, rho = line.size[e], line.rho[e]
        if C.marginal(x + s) <= rho:
            frac[e] = Fraction(1)
            order.append(e)
            x += s
            value += line.value[e]
            continue
        room = C.inverse_marginal(rho) - x
        if room > 0:
            a = Fraction(room, s)
            frac[e] = a
            order.append(e)
            value += a * line.value[e]
            x += room
        break
    return FractionalOpt(frac, profit=value - C.total(x), s_star=x, order=tuple(order))

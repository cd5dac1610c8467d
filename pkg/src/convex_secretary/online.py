"""Online algorithms without a feasibility constraint (single dimension)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Sequence

from .core import Instance, Tracker, as_line, to_fraction
from .errors import ConfigError
from .matroid import FREE
from .offline import fractional_opt
from .sampling import BETA_UNCONSTRAINED, K1, as_rng, sample_split
from .trace import CLASSIC, THRESHOLD, OnlineTrace


def dynkin(stream: Sequence[Hashable], key: Callable) -> Hashable | None:
    """Skip the first floor(n/e) arrivals, then take the first one beating all of them."""
    n = len(stream)
    if n == 0:
        return None
    r = math.floor(n / math.e)
    best = max((key(e) for e in stream[:r]), default=None)
    for e in stream[r:]:
        if best is None or key(e) > best:
            return e
    return None


@dataclass(frozen=True)
class Threshold:
    pivot: int | None  # None is the +infinity sentinel
    level: Fraction | None

    @property
    def infinite(self) -> bool:
        return self.pivot is None


def choose_tau(source, X: Sequence[int], beta=BETA_UNCONSTRAINED, k1: int = K1) -> Threshold:
    """Highest density whose integral X-prefix earns β(1 - 1/k1) of the fractional optimum on X.

    Prefixes are taken over X ∩ I, the same pool the fractional optimum uses.
    """
    line = as_line(source)
    beta = to_fraction(beta)
    bound = beta * (1 - Fraction(1, k1)) * fractional_opt(line, X).profit
    v, s = 0, 0
    for e in line.sort(X):
        if e not in line.integral:
            continue
        v += line.value[e]
        s += line.size[e]
        if v - line.cost.total(s) >= bound:
            return Threshold(e, line.rho[e])
    return Threshold(None, None)


def run_unconstrained(instance: Instance, stream: Sequence[int], rng, beta=BETA_UNCONSTRAINED, k1: int = K1,
             strict: bool = False, seed: int | None = None) -> OnlineTrace:
    """Online unconstrained algorithm: a fair coin picks Dynkin or the sampled density threshold.

    On the threshold branch an arrival is taken iff it ranks at or above τ,
    lies in I and has nonnegative marginal profit.  Failing arrivals are
    skipped; ``strict=True`` instead stops at the first failure.
    """
    line = as_line(instance)
    if instance.feasibility.kind != FREE:
        raise ConfigError("this algorithm is for unconstrained instances; use the matroid algorithm")
    rng = as_rng(rng)
    heads = int(rng.integers(2))
    tr = Tracker(instance)
    if heads:
        e = dynkin(stream, line.single)
        if e is not None and tr.gain(e) >= 0:
            tr.add(e)
        return OnlineTrace(seed, None, None, None, tr.ids, tr.profit, CLASSIC, [heads])
    X, Y = sample_split(stream, rng)
    tau = choose_tau(line, X, beta, k1)
    for e in Y:
        if line.at_least(e, tau.pivot) and e in line.integral and tr.gain(e) >= 0:
            tr.add(e)
        elif strict:
            break
    info = {"beta": to_fraction(beta), "k1": k1, "strict": strict}
    return OnlineTrace(seed, len(X), tau.level, tau.pivot, tr.ids, tr.profit, THRESHOLD, [heads], info)


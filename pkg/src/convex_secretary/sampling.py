"""Balanced half-sampling: the beta(c) bound, the random split, and an empirical check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .core import to_fraction
from .errors import ConfigError

# Constants used by the online algorithms (fixed, not recomputed at runtime).
BETA_UNCONSTRAINED = Fraction(262, 1000)
BETA_PRIME = Fraction(94, 1000)
K1 = 112
BETA_MATROID = Fraction(1, 10)


def k1_for(beta: Fraction) -> int:
    """ceil(8 * (9 / beta)**2), the sample-size constant recorded for the matroid algorithm."""
    return math.ceil(8 * (9 / Fraction(beta)) ** 2)


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class BetaCurve:
    c: Fraction
    y_star: Fraction
    beta: Fraction


def beta_objective(c: Fraction, y: Fraction) -> Fraction:
    return (y / (2 + y)) * (1 - 2 / (c * (1 - y)))


def beta_of_c(c, passes: int = 3, points: int = 1000) -> BetaCurve:
    """Maximize (y/(2+y))(1 - 2/(c(1-y))) over 0 < y < 1 by grid refinement.

    Each pass evaluates ``points`` equally spaced interior points of the
    current bracket, then shrinks the bracket to one grid step either side
    of the best point.  Three passes of 1000 points pin y* far below 1e-4.
    """
    c = to_fraction(c)
    if c < 3:
        raise ConfigError(f"beta(c) needs c >= 3, got {c}")
    lo, hi = Fraction(0), Fraction(1)
    best_y, best_f = None, None
    for _ in range(passes):
        step = (hi - lo) / (points + 1)
        for j in range(1, points + 1):
            y = lo + j * step
            if not (0 < y < 1):
                continue
            f = beta_objective(c, y)
            if best_f is None or f > best_f:
                best_y, best_f = y, f
        lo, hi = max(Fraction(0), best_y - step), min(Fraction(1), best_y + step)
        # keep the bracket denominators small
        lo = Fraction(lo).limit_denominator(10**12)
        hi = Fraction(hi).limit_denominator(10**12)
    return BetaCurve(c, best_y, best_f)


def sample_split(stream: Sequence, rng) -> tuple[list, list]:
    """k ~ Binomial(n, 1/2); X = first k arrivals, Y = the rest in order."""
    rng = as_rng(rng)
    n = len(stream)
    k = int(rng.binomial(n, 0.5)) if n else 0
    return list(stream[:k]), list(stream[k:])


def _integer_weights(weights: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for w in weights:
        den = den * w.denominator // math.gcd(den, w.denominator)
    return [int(w * den) for w in weights], den


def verify_concentration(weights: Sequence, c, trials: int, rng) -> float:
    """Fraction of trials in which a fair-coin subset keeps >= beta(c) of the total weight.

    Exact: weights are scaled to a common integer denominator and compared
    against ceil(beta * W) in the same units.
    """
    c = to_fraction(c)
    if c < 3:
        raise ConfigError(f"concentration check needs c >= 3, got {c}")
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    ws = [to_fraction(w) for w in weights]
    for i, w in enumerate(ws):
        if w < 0:
            raise ConfigError(f"weight #{i} = {w} is negative")
    total = sum(ws, Fraction(0))
    for i, w in enumerate(ws):
        if w > total / c:
            raise ConfigError(f"weight #{i} = {w} exceeds total/c = {total / c}")
    if total == 0:
        return 1.0
    beta = beta_of_c(c).beta
    iw, _ = _integer_weights(ws)
    W = sum(iw)
    need = math.ceil(beta * W)
    rng = as_rng(rng)
    hits = 0
    chunk = max(1, min(trials, 2_000_000 // max(1, len(iw))))
    fits = W < 2**62
    arr = np.array(iw, dtype=np.int64 if fits else object)
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        coins = rng.integers(0, 2, size=(m, len(iw)), dtype=np.int8)
        if fits:
            kept = coins.astype(np.int64) @ arr
        else:
            kept = coins.astype(object) @ arr
        hits += int(np.count_nonzero(kept >= need))
        done += m
    return hits / trials

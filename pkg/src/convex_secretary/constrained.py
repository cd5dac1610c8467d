"""Matroid-constrained profit: the h/g split, bounded sets, offline and online algorithms.

A threshold density is represented by a *pivot* element: the prefix at a
pivot is every element ranked at or above it in the (density, -id) total
order, and the partial prefix drops the pivot itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .core import Instance, Line, Number, Tracker, as_line, to_fraction
from .errors import ConfigError
from .matroid import Matroid, SumOfValuesSecretary, matroid_greedy
from .sampling import BETA_MATROID, as_rng, k1_for, sample_split
from .trace import CLASSIC, THRESHOLD, OnlineTrace


@dataclass(frozen=True)
class Decomposition:
    gamma: Fraction
    h: Number
    g: Number


@dataclass(frozen=True)
class BoundedWitness:
    gamma: Fraction
    max_size: int | None  # s̄(γ); None when unbounded (linear cost)
    ok: bool


def _line_and_matroid(source, m: Matroid | None) -> tuple[Line, Matroid]:
    line = as_line(source)
    if m is None:
        if not isinstance(source, Instance):
            raise ConfigError("a matroid is required when passing a bare line")
        m = source.feasibility
    return line, m


def decompose(source, A: Iterable[int], gamma) -> Decomposition:
    """h_γ(A) = Σ (ρ(e) - γ) s(e) and g_γ(A) = γ s(A) - C(s(A)); they sum to π(A)."""
    line = as_line(source)
    gamma = to_fraction(gamma)
    A = list(A)
    v = sum((line.value[e] for e in A), 0)
    s = sum(line.size[e] for e in A)
    return Decomposition(gamma, v - gamma * s, gamma * s - line.cost.total(s))


def is_bounded(source, A: Iterable[int], gamma) -> BoundedWitness:
    """A ⊆ P_γ and s(A) <= s̄(γ)."""
    line = as_line(source)
    gamma = to_fraction(gamma)
    A = list(A)
    try:
        cap = line.cost.inverse_marginal(gamma)
    except ConfigError:
        cap = None
    inside = all(line.rho[e] >= gamma for e in A)
    fits = cap is None or sum(line.size[e] for e in A) <= cap
    return BoundedWitness(gamma, cap, inside and fits)


def _prefix_literal(line: Line, T: Iterable[int], gamma: Fraction) -> tuple[list[int], list[int]]:
    P = [e for e in line.sort(T) if line.rho[e] >= gamma]
    at = [e for e in P if line.rho[e] == gamma]
    Pbar = [e for e in P if not at or e != at[-1]]
    return P, Pbar


def h_weights(line: Line, ids: Iterable[int], gamma: Fraction) -> dict:
    return {e: line.value[e] - gamma * line.size[e] for e in ids}


def H_gamma(source, m: Matroid | None, T: Iterable[int] | None, gamma) -> frozenset[int]:
    """Max-weight independent subset of P_γ^T under weights (ρ - γ) s."""
    line, m = _line_and_matroid(source, m)
    gamma = to_fraction(gamma)
    P, _ = _prefix_literal(line, line.order if T is None else T, gamma)
    return matroid_greedy(m, h_weights(line, P, gamma))


def G_gamma(source, m: Matroid | None, T: Iterable[int] | None, gamma) -> frozenset[int]:
    """Max-size independent subset of P̄_γ^T."""
    line, m = _line_and_matroid(source, m)
    gamma = to_fraction(gamma)
    _, Pbar = _prefix_literal(line, line.order if T is None else T, gamma)
    return matroid_greedy(m, {e: line.size[e] for e in Pbar})


@dataclass(frozen=True)
class MatroidResult:
    chosen: frozenset[int]
    profit: Number
    source: str  # "H", "G", "single" or "empty"
    pivot: int | None


def prefix_profile(line: Line, m: Matroid, pool: Sequence[int],
                   score: Callable[[Iterable[int]], Number] | None = None) -> list[MatroidResult]:
    """For every pivot in ``pool`` (taken in rank order), the offline answer on that prefix.

    Restricting to the prefix at pivot τ leaves exactly the H/G candidates
    whose pivot ranks at or above τ, plus singles from the prefix, so the
    answer for every prefix is a running best over pivots.  Entry i is
    the answer on the first i+1 elements of the sorted pool.
    """
    score = line.profit if score is None else score
    pool = line.sort(pool)
    out: list[MatroidResult] = []
    best = MatroidResult(frozenset(), 0, "empty", None)
    for i, p in enumerate(pool):
        gamma = line.rho[p]
        head = pool[: i + 1]
        cands = [
            ("H", matroid_greedy(m, h_weights(line, head, gamma))),
            ("G", matroid_greedy(m, {e: line.size[e] for e in head[:-1]})),
        ]
        if m.is_independent([p]):
            cands.append(("single", frozenset([p])))
        for src, S in cands:
            val = score(S)
            if val > best.profit:
                best = MatroidResult(frozenset(S), val, src, p)
        out.append(best)
    return out


def offline_matroid(source, m: Matroid | None = None, T: Iterable[int] | None = None) -> MatroidResult:
    """Best of all H_γ, all G_γ, the best feasible single element, and ∅."""
    line, m = _line_and_matroid(source, m)
    prof = prefix_profile(line, m, line.order if T is None else list(T))
    return prof[-1] if prof else MatroidResult(frozenset(), 0, "empty", None)


def choose_tau_matroid(line: Line, m: Matroid, X: Sequence[int], beta: Fraction) -> int | None:
    """Highest pivot in X whose prefix answer reaches β/16 of the answer on all of X."""
    prof = prefix_profile(line, m, X)
    if not prof:
        return None
    bound = Fraction(beta) / 16 * prof[-1].profit
    xs = line.sort(X)
    for p, r in zip(xs, prof):
        if r.profit >= bound:
            return p
    return None  # unreachable: the last entry always qualifies


def run_matroid(source, m: Matroid | None, stream: Sequence[int], rng, beta=BETA_MATROID,
             guard: Instance | None = None, seed: int | None = None) -> OnlineTrace:
    """Online matroid-constrained algorithm.

    ``source`` supplies densities and the profit used for the sample
    statistics.  ``guard`` is the instance whose true profit gates every
    acceptance (defaults to ``source`` when it is an instance).
    """
    line, m = _line_and_matroid(source, m)
    if guard is None:
        if not isinstance(source, Instance):
            raise ConfigError("run_matroid on a bare line needs a guard instance")
        guard = source
    beta = to_fraction(beta)
    rng = as_rng(rng)
    X, Y = sample_split(stream, rng)
    heads = int(rng.integers(2))
    tr = Tracker(guard)
    info = {"beta": beta, "k1": k1_for(beta)}
    if heads:
        thr = max(line.single(x) for x in X) if X else None
        for e in Y:
            p = line.single(e)
            beats = p > 0 if thr is None else p > thr
            if beats and m.is_independent([e]) and tr.gain(e) >= 0:
                tr.add(e)
                break
        return OnlineTrace(seed, len(X), None, None, tr.ids, tr.profit, CLASSIC, [heads], info)

    tau_id = choose_tau_matroid(line, m, X, beta)
    second = int(rng.integers(2))
    info["objective"] = "h" if second else "s"
    if tau_id is None:
        return OnlineTrace(seed, len(X), None, None, [], 0, THRESHOLD, [heads, second], info)
    tau = line.rho[tau_id]
    sub = [e for e in Y if line.at_least(e, tau_id) and e in line.integral]
    if second:
        obj = {e: line.value[e] - tau * line.size[e] for e in sub}
    else:
        obj = {e: line.size[e] for e in sub}
    alg = SumOfValuesSecretary(m, sub)
    for e in sub:
        if alg.offer(e, obj[e]) and tr.gain(e) >= 0:
            tr.add(e)
    return OnlineTrace(seed, len(X), tau, tau_id, tr.ids, tr.profit, THRESHOLD, [heads, second], info)

"""Multi-dimensional costs: proper density vectors and the algorithms built on them.

A proper density vector splits an element's value across dimensions,
ρ_j s_j summing to v, so that every dimension sits at the same level
Π_j(ρ_j) = x*.  Sorting by that level gives one order shared by every
dimension, and each dimension's projection (values ρ_j s_j, sizes s_j,
cost C_j) is then an ordinary single-dimension instance over that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .constrained import prefix_profile, run_matroid
from .core import CostFunction, Element, Instance, Line, Number, Tracker, doubling_bound, to_fraction
from .errors import ConfigError, InternalConsistencyError
from .matroid import FREE, Matroid, matroid_greedy
from .offline import fractional_opt
from .online import dynkin
from .sampling import BETA_MATROID, BETA_UNCONSTRAINED, as_rng, sample_split
from .trace import CLASSIC, THRESHOLD, OnlineTrace


def Pi(C: CostFunction, gamma) -> Fraction:
    """max_t (γ t - C(t)), attained at t = s̄(γ)."""
    gamma = to_fraction(gamma)
    t = C.inverse_marginal(gamma)
    return gamma * t - C.total(t)


def I_of_t(C: CostFunction, t: int) -> int:
    """Level Π(c(t)) = c(t) t - C(t)."""
    if t < 1:
        raise ConfigError("I(t) needs t >= 1")
    return C.marginal(t) * t - C.total(t)


def doubling_bounds(instance: Instance, e: Element | int) -> tuple[int, ...]:
    """Per dimension, the first power of two t with c_j(t) > v(e)."""
    e = instance[e] if isinstance(e, int) else e
    return tuple(doubling_bound(C, e.value) for C in instance.costs)


def _bracket(C: CostFunction, x: Fraction, bound: int) -> int:
    """Largest t >= 1 with I(t) <= x, searching below ``bound`` (grown if too small)."""
    while I_of_t(C, bound) <= x:
        bound *= 2
    lo, hi = 1, bound  # I(lo) = 0 <= x < I(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if I_of_t(C, mid) <= x:
            lo = mid
        else:
            hi = mid
    return lo


def find_density(instance: Instance, x, s: Sequence[int], bounds: Sequence[int] | None = None):
    """Π_j^{-1}(x) per dimension with the bracketing sizes t_j.

    Returns (rho, t).  Dimensions with s_j = 0 are skipped: rho_j = inf, t_j = 0.
    """
    x = to_fraction(x)
    if x < 0:
        raise ConfigError("level x must be >= 0")
    rho, ts = [], []
    for j, C in enumerate(instance.costs):
        if s[j] == 0:
            rho.append(math.inf)
            ts.append(0)
            continue
        b = bounds[j] if bounds is not None else 2
        t = _bracket(C, x, max(2, b))
        rho.append((x + C.total(t)) / t)
        ts.append(t)
    return tuple(rho), tuple(ts)


@dataclass(frozen=True)
class ProperDensity:
    id: int
    rho: tuple  # Fractions, math.inf where the element has zero size
    pi_level: Fraction  # x* = Π(e)
    t: tuple[int, ...]
    scale: Fraction = Fraction(1)  # < 1 only for elements worth less than Σ c_j(1) s_j

    @property
    def key(self) -> tuple:
        """Sort key for the shared order, larger = higher rank."""
        return (self.pi_level, self.scale, -self.id)


def _phi(instance: Instance, x: int, s, bounds) -> Fraction:
    rho, _ = find_density(instance, x, s, bounds)
    return sum((r * sj for r, sj in zip(rho, s) if sj), Fraction(0))


def find_proper_density(instance: Instance, e: Element | int) -> ProperDensity:
    """Exact proper density vector of one element.

    Integer binary search for x with Φ(x) <= v < Φ(x+1), where
    Φ(x) = Σ_j Π_j^{-1}(x) s_j, then the closed form for x* on that
    bracket.  An element worth less than Φ(0) = Σ c_j(1) s_j has level 0;
    its vector is c_j(1) scaled by v / Φ(0), and the scale orders such
    elements among themselves.
    """
    e = instance[e] if isinstance(e, int) else e

    def make():
        s = e.sizes
        v = e.value
        bounds = doubling_bounds(instance, e)
        phi0 = _phi(instance, 0, s, bounds)
        if v < phi0:
            lam = Fraction(v) / phi0
            rho = tuple(C.marginal(1) * lam if sj else math.inf for C, sj in zip(instance.costs, s))
            return ProperDensity(e.id, rho, Fraction(0), tuple(1 if sj else 0 for sj in s), lam)
        hi = min(I_of_t(C, b) for C, b, sj in zip(instance.costs, bounds, s) if sj)
        while _phi(instance, hi, s, bounds) <= v:
            hi *= 2
        lo = 0  # Φ(lo) <= v < Φ(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _phi(instance, mid, s, bounds) <= v:
                lo = mid
            else:
                hi = mid
        _, t = find_density(instance, lo, s, bounds)
        num = Fraction(v)
        den = Fraction(0)
        for C, tj, sj in zip(instance.costs, t, s):
            if sj:
                num -= Fraction(C.total(tj) * sj, tj)
                den += Fraction(sj, tj)
        x_star = num / den
        rho = tuple((x_star + C.total(tj)) / tj if sj else math.inf for C, tj, sj in zip(instance.costs, t, s))
        pd = ProperDensity(e.id, rho, x_star, t)
        if sum(r * sj for r, sj in zip(rho, s) if sj) != v:
            raise InternalConsistencyError(f"element {e.id}: value split does not add up")
        return pd

    return instance.memo(("proper", e.id), make)


# ------------------------------------------------------------------ orders


def pi_order(instance: Instance) -> tuple[int, ...]:
    """All ids in decreasing proper-density order."""
    return instance.memo(
        "pi_order",
        lambda: tuple(sorted(instance.ids, key=lambda i: find_proper_density(instance, i).key, reverse=True)),
    )


def pi_pos(instance: Instance) -> dict[int, int]:
    return instance.memo("pi_pos", lambda: {e: k for k, e in enumerate(pi_order(instance))})


def projection(instance: Instance, i: int) -> Line:
    """Dimension i as a one-dimensional problem: values ρ_i s_i, sizes s_i, cost C_i.

    Elements with zero size in dimension i carry no value or cost there and
    are left out.  The integral set is the multi-dimensional one.
    """
    if not (0 <= i < instance.dims):
        raise ConfigError(f"dimension {i} out of range")

    def make():
        order = tuple(e for e in pi_order(instance) if instance[e].sizes[i] > 0)
        pd = {e: find_proper_density(instance, e) for e in order}
        return Line(
            order,
            {e: pd[e].rho[i] * instance[e].sizes[i] for e in order},
            {e: instance[e].sizes[i] for e in order},
            {e: pd[e].rho[i] for e in order},
            frozenset(e for e in order if e in instance.integral_ids),
            instance.costs[i],
        )

    return instance.memo(("projection", i), make)


def dim_profit(instance: Instance, i: int, A) -> Number:
    """π_i(A) = v_i(A) - C_i(s_i(A))."""
    line = projection(instance, i)
    return line.profit(e for e in A if e in line.pos)


def _ranked(instance: Instance, e: int, pivot: int | None) -> bool:
    pos = pi_pos(instance)
    return pivot is not None and pos[e] <= pos[pivot]


# -------------------------------------------------------- offline, no matroid


@dataclass(frozen=True)
class MultiOffline:
    chosen: frozenset[int]
    profit: Number
    which: str  # "prefix", "single" or "empty"
    prefix: tuple[int, ...]  # integral part of the shortest per-dimension optimum
    stop: int | None  # element where that optimum stops (its fractional element, if any)
    shortest_dim: int | None


def _frontier(instance: Instance, i: int, pool: Sequence[int]) -> tuple[int, Fraction]:
    """Where the fractional optimum of dimension i stops, as (position in pool, fraction taken)."""
    line = projection(instance, i)
    sub = [e for e in pool if e in line.pos]
    opt = fractional_opt(line, sub)
    full = [e for e in opt.order if opt.fractions[e] == 1]
    if len(full) == len(sub):
        return len(pool), Fraction(0)
    stop = sub[len(full)]
    return pool.index(stop), opt.fractions.get(stop, Fraction(0))


def _shortest_prefix(instance: Instance, pool: Sequence[int]):
    best = None
    for i in range(instance.dims):
        f = _frontier(instance, i, pool)
        if best is None or f < best[0]:
            best = (f, i)
    (k, _), i = best
    return list(pool[:k]), (pool[k] if k < len(pool) else None), i


def offline_unconstrained_multi(instance: Instance, T: Sequence[int] | None = None) -> MultiOffline:
    """Integral part of the shortest per-dimension fractional optimum, or the best single element."""
    pos = pi_pos(instance)
    ids = instance.ids if T is None else T
    pool = sorted((e for e in ids if e in instance.integral_ids), key=pos.__getitem__)
    if not pool:
        A, stop, d = [], None, None
    else:
        A, stop, d = _shortest_prefix(instance, pool)
    pA = instance.profit(A)
    singles = sorted(ids, key=pos.__getitem__)
    m = max(singles, key=instance.single_profit, default=None)
    if m is not None and instance.single_profit(m) > max(pA, 0):
        return MultiOffline(frozenset([m]), instance.single_profit(m), "single", tuple(A), stop, d)
    if pA < 0:
        return MultiOffline(frozenset(), 0, "empty", tuple(A), stop, d)
    return MultiOffline(frozenset(A), pA, "prefix", tuple(A), stop, d)


# ------------------------------------------------------------- online, no matroid


def choose_tau_multi(instance: Instance, X: Sequence[int], beta=BETA_UNCONSTRAINED) -> int | None:
    """Highest e_τ in X ∩ I with π(P̄_τ^X) + π(e_τ) >= β/2 · π_i(F*_i(X)) in every dimension."""
    beta = to_fraction(beta)
    pos = pi_pos(instance)
    targets = []
    for i in range(instance.dims):
        line = projection(instance, i)
        targets.append(beta / 2 * fractional_opt(line, [x for x in X if x in line.pos]).profit)
    above = Tracker(instance)
    for e in sorted((x for x in X if x in instance.integral_ids), key=pos.__getitem__):
        got = above.profit + instance.single_profit(e)
        if all(got >= t for t in targets):
            return e
        above.add(e)
    return None


def run_multi_unconstrained(instance: Instance, stream: Sequence[int], rng, beta=BETA_UNCONSTRAINED,
             strict: bool = False, seed: int | None = None) -> OnlineTrace:
    """Multi-dimensional unconstrained online algorithm (Dynkin or a sampled Π-level threshold)."""
    if instance.feasibility.kind != FREE:
        raise ConfigError("this algorithm is for unconstrained instances")
    rng = as_rng(rng)
    heads = int(rng.integers(2))
    tr = Tracker(instance)
    if heads:
        e = dynkin(stream, instance.single_profit)
        if e is not None and tr.gain(e) >= 0:
            tr.add(e)
        return OnlineTrace(seed, None, None, None, tr.ids, tr.profit, CLASSIC, [heads])
    X, Y = sample_split(stream, rng)
    tau_id = choose_tau_multi(instance, X, beta)
    for e in Y:
        if _ranked(instance, e, tau_id) and e in instance.integral_ids and tr.gain(e) >= 0:
            tr.add(e)
        elif strict:
            break
    tau = None if tau_id is None else find_proper_density(instance, tau_id).pi_level
    info = {"beta": to_fraction(beta), "strict": strict}
    return OnlineTrace(seed, len(X), tau, tau_id, tr.ids, tr.profit, THRESHOLD, [heads], info)


# ------------------------------------------------------------ offline, matroid


@dataclass(frozen=True)
class MultiMatroidResult:
    chosen: frozenset[int]
    profit: Number
    source: str  # "G", "D", "single" or "empty"
    pivot: int | None
    dim: int | None


def multi_prefix_profile(instance: Instance, m: Matroid, pool: Sequence[int]) -> list[MultiMatroidResult]:
    """Offline multi-dimensional matroid answer on every prefix of ``pool`` (in Π order).

    Candidates at pivot γ: G_{γ,i} (largest s_i among independent subsets
    of the partial prefix), D_{γ,i} (the single-dimension offline answer
    for objective π_i on the prefix) and the pivot as a single; all are
    compared by the true profit π.  D_{γ,i} for every prefix comes from
    one running profile per dimension.
    """
    pos = pi_pos(instance)
    pool = sorted(pool, key=pos.__getitem__)
    dims = range(instance.dims)
    lines = [projection(instance, i) for i in dims]
    dprof = []
    for i in dims:
        sub = [e for e in pool if e in lines[i].pos]
        dprof.append(dict(zip(sub, prefix_profile(lines[i], m, sub))))
    last_d: list = [None] * instance.dims
    best = MultiMatroidResult(frozenset(), 0, "empty", None, None)
    out = []
    for k, p in enumerate(pool):
        head = pool[:k]
        cands = []
        for i in dims:
            sizes = {e: instance[e].sizes[i] for e in head}
            cands.append(("G", i, matroid_greedy(m, sizes)))
            if p in dprof[i]:
                last_d[i] = dprof[i][p].chosen
            if last_d[i] is not None:
                cands.append(("D", i, last_d[i]))
        if m.is_independent([p]):
            cands.append(("single", None, frozenset([p])))
        for src, i, S in cands:
            val = instance.profit(S)
            if val > best.profit:
                best = MultiMatroidResult(frozenset(S), val, src, p, i)
        out.append(best)
    return out


def offline_matroid_multi(instance: Instance, m: Matroid | None = None,
                          T: Sequence[int] | None = None) -> MultiMatroidResult:
    """Best of all G_{γ,i}, all D_{γ,i}, the best feasible single element, and ∅."""
    m = instance.feasibility if m is None else m
    prof = multi_prefix_profile(instance, m, instance.ids if T is None else T)
    return prof[-1] if prof else MultiMatroidResult(frozenset(), 0, "empty", None, None)


# ------------------------------------------------------------- online, matroid


def run_multi_matroid(instance: Instance, m: Matroid | None, stream: Sequence[int], rng, beta=BETA_MATROID,
             seed: int | None = None) -> OnlineTrace:
    """Multi-dimensional matroid online algorithm.

    A uniform draw from {1, 2, 3} picks Dynkin, the single-dimension matroid
    algorithm on a random dimension's projection, or that algorithm on the
    part of the stream above a sampled Π-level threshold.  Acceptances are
    always gated by the true marginal profit.
    """
    m = instance.feasibility if m is None else m
    beta = to_fraction(beta)
    rng = as_rng(rng)
    c = int(rng.integers(1, 4))
    dim = int(rng.integers(instance.dims))
    ell = instance.dims
    info = {"mode": c, "dim": dim, "beta": beta}
    if c == 1:
        tr = Tracker(instance)
        e = dynkin(stream, instance.single_profit)
        if e is not None and m.is_independent([e]) and tr.gain(e) >= 0:
            tr.add(e)
        return OnlineTrace(seed, None, None, None, tr.ids, tr.profit, CLASSIC, [c, dim], info)
    line = projection(instance, dim)
    if c == 2:
        sub = [e for e in stream if e in line.pos]
        inner = run_matroid(line, m, sub, rng, beta, guard=instance)
        info.update(inner_branch=inner.branch, inner_tau_id=inner.tau_id, **inner.info)
        return OnlineTrace(seed, inner.k, inner.tau, inner.tau_id, inner.accepted, inner.profit,
                           inner.branch, [c, dim] + inner.coins, info)
    X, Y = sample_split(stream, rng)
    prof = multi_prefix_profile(instance, m, X)
    tau_id = None
    if prof:
        bound = beta / (49 * ell * ell) * prof[-1].profit
        xs = sorted(X, key=pi_pos(instance).__getitem__)
        tau_id = next((p for p, r in zip(xs, prof) if r.profit >= bound), None)
    if tau_id is None:
        return OnlineTrace(seed, len(X), None, None, [], 0, THRESHOLD, [c, dim], info)
    sub = [e for e in Y if _ranked(instance, e, tau_id) and e in line.pos]
    inner = run_matroid(line, m, sub, rng, beta, guard=instance)
    info.update(inner_branch=inner.branch, inner_tau_id=inner.tau_id, inner_k=inner.k, **inner.info)
    tau = find_proper_density(instance, tau_id).pi_level
    return OnlineTrace(seed, len(X), tau, tau_id, inner.accepted, inner.profit, THRESHOLD,
                       [c, dim] + inner.coins, info)

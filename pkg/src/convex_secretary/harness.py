"""Instance generators, the Monte Carlo driver, run audits, and event measurement."""

from __future__ import annotations

import csv
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .constrained import run_matroid
from .core import CostFunction, Element, Instance, Line, Tracker, fmt_rational, to_fraction
from .errors import ConfigError, InvariantViolation
from .matroid import FREE, Matroid
from .multidim import pi_pos, projection, run_multi_unconstrained, run_multi_matroid
from .offline import fractional_opt, greedy_offline
from .online import dynkin, run_unconstrained
from .oracle import MAX_N, brute_force_opt
from .sampling import BETA_MATROID, BETA_PRIME, BETA_UNCONSTRAINED, K1
from .trace import CLASSIC, THRESHOLD, OnlineTrace

CSV_HEADER = "# convex-secretary v1"
ALGORITHMS = ("2", "4", "7", "8", "dynkin")


# ------------------------------------------------------------- generation


def _cost(spec) -> CostFunction:
    if isinstance(spec, CostFunction):
        return spec
    if spec is None:
        return CostFunction.power(2)
    return CostFunction.from_json(spec)


def make_matroid(spec: Mapping | None, ids: Sequence[int], rng) -> Matroid:
    """Feasibility for a generated instance; partitions may ask for random blocks."""
    if not spec or spec.get("kind", FREE) == FREE:
        return Matroid.free(ids)
    if spec["kind"] == "partition" and "parts" not in spec:
        blocks = int(spec.get("blocks", 2))
        caps = spec.get("caps", [int(spec.get("cap", 1))] * blocks)
        if blocks < 1 or len(caps) != blocks:
            raise ConfigError("random partition needs blocks >= 1 and one cap per block")
        assign = rng.integers(blocks, size=len(ids))
        parts = [[i for i, b in zip(ids, assign) if b == j] for j in range(blocks)]
        return Matroid.partition(parts, caps)
    return Matroid.from_json(spec, ids)


def _uniform_elements(rng, n, vmax, smax, dims, start=1, zero_prob=0.0, smin=1):
    els = []
    for i in range(n):
        v = int(rng.integers(0, vmax + 1))
        sizes = [int(rng.integers(smin, smax + 1)) for _ in range(dims)]
        if dims > 1 and zero_prob > 0:
            for j in range(dims):
                if rng.random() < zero_prob:
                    sizes[j] = 0
            if all(s == 0 for s in sizes):
                sizes[int(rng.integers(dims))] = int(rng.integers(smin, smax + 1))
        els.append([start + i, v, sizes])
    return els


def _clip_for_a2(els, costs):
    """Lower values so that c_j(s_j(U)) exceeds every value (needed for multi-dimensional input)."""
    if len(costs) == 1 or not els:
        return els
    cap = min(C.marginal(max(1, sum(e[2][j] for e in els))) for j, C in enumerate(costs)) - 1
    for e in els:
        e[1] = min(e[1], max(cap, 0))
    return els


def _build(els, costs, matroid_spec, rng) -> Instance:
    elements = tuple(Element(i, v, tuple(s)) for i, v, s in els)
    ids = [e.id for e in elements]
    return Instance(elements, tuple(costs), make_matroid(matroid_spec, ids, rng))


def generate_instance(spec: Mapping, seed: int | None = None) -> Instance:
    """Deterministic instance from a generator spec.

    Families: ``uniform``, ``cluster-below-threshold`` (one dimension) and
    ``heavy-single``.  Common keys: n, vmax, smax, dims, cost (one JSON
    cost used for every dimension, or ``costs`` per dimension), matroid.
    """
    spec = dict(spec)
    fam = spec.get("family", "uniform")
    seed = spec.get("seed", seed)
    rng = np.random.default_rng(seed)
    n = int(spec.get("n", 10))
    vmax = int(spec.get("vmax", 10))
    smax = int(spec.get("smax", 3))
    dims = int(spec.get("dims", 1))
    if n < 0 or vmax < 0 or smax < 1 or dims < 1:
        raise ConfigError("generator needs n >= 0, vmax >= 0, smax >= 1, dims >= 1")
    if "costs" in spec:
        costs = [_cost(c) for c in spec["costs"]]
        if len(costs) != dims:
            raise ConfigError("need one cost per dimension")
    else:
        costs = [_cost(spec.get("cost"))] * dims
    zero_prob = float(spec.get("zero_prob", 0.0))
    mspec = spec.get("matroid")

    if fam == "uniform":
        els = _uniform_elements(rng, n, vmax, smax, dims, zero_prob=zero_prob)
        return _build(_clip_for_a2(els, costs), costs, mspec, rng)
    if fam == "heavy-single":
        return _heavy_single(rng, n, vmax, smax, dims, costs, mspec, zero_prob)
    if fam == "cluster-below-threshold":
        if dims != 1:
            raise ConfigError("cluster-below-threshold is single-dimensional")
        return _cluster(rng, n, vmax, smax, costs[0], mspec)
    raise ConfigError(f"unknown generator family {fam!r}")


def _heavy_single(rng, n, vmax, smax, dims, costs, mspec, zero_prob) -> Instance:
    if n < 1:
        raise ConfigError("heavy-single needs n >= 1")
    while True:
        rest = _uniform_elements(rng, n - 1, vmax, smax, dims, start=1, zero_prob=zero_prob)
        pos = 0
        for _, v, s in rest:
            p = v - sum(C.total(x) for C, x in zip(costs, s))
            pos += max(p, 0)
        unit = sum(C.total(1) for C in costs)
        heavy = [n, pos + unit + 1, [1] * dims]
        els = rest + [heavy]
        if dims == 1 or all(C.marginal(sum(e[2][j] for e in els)) > max(e[1] for e in els)
                            for j, C in enumerate(costs)):
            return _build(els, costs, mspec, rng)
        if vmax == 0:
            raise ConfigError("heavy-single cannot satisfy c_j(s_j(U)) > max value; raise smax or n")
        vmax //= 2


def _cluster(rng, n, vmax, smax, C: CostFunction, mspec) -> Instance:
    n_cluster = (n + 1) // 2
    n_core = n - n_cluster
    if n_core < 1:
        raise ConfigError("cluster-below-threshold needs n >= 2")
    for _ in range(1000):
        core = _uniform_elements(rng, n_core, max(vmax, 1), smax, 1)
        inst = _build(core, [C], None, rng)
        A = greedy_offline(inst).prefix
        if A:
            break
    else:
        raise ConfigError("could not draw a core with a nonempty greedy prefix")
    line = Line.of(inst)
    rho_minus = min(line.rho[e] for e in A)
    S_A = sum(line.size[e] for e in A)
    eps = rho_minus / 10
    s = math.floor(1 / eps) + 1
    # big enough that taking it after the prefix loses money
    while rho_minus * s >= C.total(S_A + s) - C.total(S_A):
        s += 1
    els = list(core)
    for i in range(n_cluster):
        size = s + int(rng.integers(0, 3))
        v = math.ceil(rho_minus * size) - 1
        els.append([n_core + 1 + i, v, [size]])
    return _build(els, [C], mspec, rng)


# -------------------------------------------------------------- experiments


@dataclass
class ExperimentConfig:
    algorithm: str
    instance: Instance
    trials: int = 1000
    seed: int = 0
    matroid: Matroid | None = None
    beta: Fraction | None = None
    k1: int | None = None
    beta_prime: Fraction | None = None
    out: str | None = None
    oracle: bool = True
    strict: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        for name in ("beta", "beta_prime"):
            val = getattr(self, name)
            if val is not None:
                val = to_fraction(val)
                if not (0 < val <= 1):
                    raise ConfigError(f"{name} must lie in (0, 1]")
                setattr(self, name, val)
        if self.k1 is not None and self.k1 < 2:
            raise ConfigError("k1 must be >= 2")
        if self.matroid is None:
            self.matroid = self.instance.feasibility

    def default_beta(self) -> Fraction:
        if self.beta is not None:
            return self.beta
        return BETA_UNCONSTRAINED if self.algorithm in ("2", "7") else BETA_MATROID


@dataclass
class TrialRecord:
    trial: int
    seed: int
    k: int | None
    tau: Fraction | None
    tau_id: int | None
    branch: str
    coins: list[int]
    accepted: list[int]
    profit: Fraction | int
    oracle_profit: Fraction | int | None = None
    e1: bool | None = None
    e2: bool | None = None
    picked_best: bool | None = None
    info: dict = field(default_factory=dict)

    def row(self) -> dict:
        tr = OnlineTrace(self.seed, self.k, self.tau, self.tau_id, self.accepted, self.profit,
                         self.branch, self.coins)
        r = {"trial": self.trial}
        r.update(tr.row())
        r["oracle_profit"] = "" if self.oracle_profit is None else str(fmt_rational(self.oracle_profit))
        r["e1"] = "" if self.e1 is None else int(self.e1)
        r["e2"] = "" if self.e2 is None else int(self.e2)
        return r


def trial_seed(master: int, i: int) -> int:
    """Seed of trial i, from a counter-based split of the master seed."""
    ss = np.random.SeedSequence(entropy=master, spawn_key=(i,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_order(ids: Sequence[int], rng) -> list[int]:
    """Uniform arrival order (numpy's Fisher-Yates shuffle); the first draw of every trial."""
    return [int(x) for x in rng.permutation(np.array(ids, dtype=np.int64))]


def run_algorithm(cfg: ExperimentConfig, stream: Sequence[int], rng, seed: int | None = None) -> OnlineTrace:
    inst, m = cfg.instance, cfg.matroid
    beta = cfg.default_beta()
    if cfg.algorithm == "2":
        return run_unconstrained(inst.with_feasibility(m) if m is not inst.feasibility else inst, stream, rng,
                        beta, cfg.k1 or K1, strict=cfg.strict, seed=seed)
    if cfg.algorithm == "4":
        return run_matroid(inst, m, stream, rng, beta, seed=seed)
    if cfg.algorithm == "7":
        return run_multi_unconstrained(inst, stream, rng, beta, strict=cfg.strict, seed=seed)
    if cfg.algorithm == "8":
        return run_multi_matroid(inst, m, stream, rng, beta, seed=seed)
    pick = dynkin(stream, inst.single_profit)
    acc = [pick] if pick is not None else []
    return OnlineTrace(seed, None, None, None, acc, inst.profit(acc), CLASSIC)


def audit_trace(cfg: ExperimentConfig, stream: Sequence[int], trace: OnlineTrace) -> None:
    """Replay a run's acceptances and check every safety invariant; raise on any breach."""
    inst, m, alg = cfg.instance, cfg.matroid, cfg.algorithm
    acc = list(trace.accepted)

    def fail(msg):
        raise InvariantViolation(f"alg {alg}, seed {trace.seed}: {msg}")

    if len(set(acc)) != len(acc):
        fail("an element was accepted twice")
    order = {e: i for i, e in enumerate(stream)}
    if any(e not in order for e in acc):
        fail("accepted an element that never arrived")
    if [order[e] for e in acc] != sorted(order[e] for e in acc):
        fail("acceptances are out of arrival order")
    if not m.is_independent(acc):
        fail(f"accepted set {acc} is not independent")
    if inst.profit(acc) != trace.profit:
        fail("reported profit differs from the accepted set's profit")
    if alg == "dynkin":
        return
    tr = Tracker(inst)
    for e in acc:
        if tr.gain(e) < 0:
            fail(f"element {e} was accepted with negative marginal profit")
        tr.add(e)
    if trace.k is not None and alg in ("2", "4", "7") and any(order[e] < trace.k for e in acc):
        fail("accepted an element from the sample")
    if trace.branch != THRESHOLD:
        return
    I = inst.integral_ids
    needs_I = alg != "8" or trace.info.get("inner_branch") == THRESHOLD
    if needs_I and any(e not in I for e in acc):
        fail("threshold branch accepted an element outside I")
    if alg in ("2", "4"):
        line = Line.of(inst)
        if any(not line.at_least(e, trace.tau_id) for e in acc):
            fail("threshold branch accepted an element below tau")
    elif alg == "7" or (alg == "8" and trace.info.get("mode") == 3):
        pos = pi_pos(inst)
        if acc and (trace.tau_id is None or any(pos[e] > pos[trace.tau_id] for e in acc)):
            fail("threshold branch accepted an element below the tau level")
    if alg == "8" and trace.info.get("inner_branch") == THRESHOLD:
        line = projection(inst, trace.info["dim"])
        if any(not line.at_least(e, trace.info.get("inner_tau_id")) for e in acc):
            fail("inner threshold accepted an element below its tau")


def _one_trial(args):
    cfg, i = args
    seed = trial_seed(cfg.seed, i)
    rng = np.random.default_rng(seed)
    stream = trial_order(cfg.instance.ids, rng)
    trace = run_algorithm(cfg, stream, rng, seed)
    audit_trace(cfg, stream, trace)
    return i, seed, stream, trace


def oracle_value(inst: Instance, m: Matroid) -> tuple[Fraction | int, str]:
    """Exact optimum when brute force is allowed, else a valid upper bound."""
    if inst.n <= MAX_N:
        return brute_force_opt(inst, m).best_profit, "exact"
    positive = sum(max(inst.single_profit(e), 0) for e in inst.ids)
    if inst.dims == 1 and m.kind == FREE:
        bound = fractional_opt(inst).profit + max(max(inst.single_profit(e) for e in inst.ids), 0)
        return min(bound, positive), "upper-bound"
    return positive, "upper-bound"


def _run_trials(cfg: ExperimentConfig):
    jobs = [(cfg, i) for i in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            res = list(ex.map(_one_trial, jobs, chunksize=max(1, cfg.trials // (4 * cfg.workers))))
    else:
        res = [_one_trial(j) for j in jobs]
    res.sort(key=lambda r: r[0])
    return res


def estimate_cr(cfg: ExperimentConfig) -> dict:
    """Run ``cfg.trials`` random orders; summarise profits and the empirical competitive ratio."""
    opt, kind = oracle_value(cfg.instance, cfg.matroid) if cfg.oracle else (None, "none")
    best = None
    if cfg.algorithm == "dynkin":
        profits = {e: cfg.instance.single_profit(e) for e in cfg.instance.ids}
        top = max(profits.values())
        best = {e for e, p in profits.items() if p == top}
    setup = None
    if cfg.algorithm == "2" and cfg.instance.dims == 1 and cfg.matroid.kind == FREE:
        setup = event_setup(cfg.instance, cfg.default_beta(), cfg.k1 or K1)
        setup = setup if setup.applicable else None
    records = []
    for i, seed, stream, tr in _run_trials(cfg):
        rec = TrialRecord(i, seed, tr.k, tr.tau, tr.tau_id, tr.branch, tr.coins, tr.accepted, tr.profit,
                          oracle_profit=opt, info=tr.info)
        if setup is not None:
            rec.e1, rec.e2 = _events(cfg, setup, _sample_of(cfg, seed))
        if best is not None:
            rec.picked_best = bool(tr.accepted) and tr.accepted[0] in best
        if opt is not None and kind == "exact" and rec.profit > opt:
            raise InvariantViolation(f"trial {i}: profit {rec.profit} exceeds the optimum {opt}")
        records.append(rec)
    summary = summarize(cfg, records, opt, kind)
    if cfg.out:
        write_csv(cfg.out, records)
        with open(_summary_path(cfg.out), "w") as fh:
            json.dump(summary, fh, indent=1, sort_keys=True)
            fh.write("\n")
    summary["records"] = records
    return summary


def _summary_path(out: str) -> str:
    return (out[:-4] if out.endswith(".csv") else out) + ".summary.json"


def summarize(cfg: ExperimentConfig, records: list[TrialRecord], opt, kind) -> dict:
    profits = [float(r.profit) for r in records]
    mean_exact = sum((Fraction(r.profit) for r in records), Fraction(0)) / len(records)
    s = {
        "algorithm": cfg.algorithm,
        "trials": len(records),
        "seed": cfg.seed,
        "n": cfg.instance.n,
        "dims": cfg.instance.dims,
        "matroid": cfg.matroid.to_json(),
        "beta": str(fmt_rational(cfg.default_beta())),
        "k1": cfg.k1 or K1,
        "mean_profit": float(mean_exact),
        "std_profit": statistics.pstdev(profits) if len(profits) > 1 else 0.0,
        "oracle_profit": None if opt is None else float(opt),
        "oracle_kind": kind,
        "violations": 0,
    }
    if opt is None:
        s["empirical_cr"] = None
    elif mean_exact > 0:
        s["empirical_cr"] = float(Fraction(opt) / mean_exact)
    else:
        s["empirical_cr"] = 1.0 if opt == 0 else math.inf
    branches: dict[str, int] = {}
    for r in records:
        branches[r.branch] = branches.get(r.branch, 0) + 1
    s["branches"] = branches
    flags = [(r.e1, r.e2) for r in records if r.e1 is not None]
    if flags:
        s["pr_e1"] = sum(a for a, _ in flags) / len(flags)
        s["pr_e2"] = sum(b for _, b in flags) / len(flags)
        s["pr_e1_and_e2"] = sum(a and b for a, b in flags) / len(flags)
    picks = [r.picked_best for r in records if r.picked_best is not None]
    if picks:
        s["best_pick_frequency"] = sum(picks) / len(picks)
    return s


def write_csv(path: str, records: list[TrialRecord]) -> None:
    cols = ["trial", "seed", "k", "tau", "tau_id", "branch", "coins", "accepted", "profit",
            "oracle_profit", "e1", "e2"]
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.row())


def replay(cfg: ExperimentConfig, seed: int) -> OnlineTrace:
    """Re-run one trial from its recorded seed."""
    rng = np.random.default_rng(seed)
    return run_algorithm(cfg, trial_order(cfg.instance.ids, rng), rng, seed)


# ------------------------------------------------------------------ events


@dataclass
class EventSetup:
    applicable: bool
    reason: str
    rho_minus_id: int | None = None
    rho_plus_id: int | None = None
    prefix_minus: list[int] = field(default_factory=list)
    prefix_plus: list[int] = field(default_factory=list)
    profit_minus: Fraction | int = 0
    profit_plus: Fraction | int = 0


def event_setup(inst: Instance, beta=BETA_UNCONSTRAINED, k1: int = K1) -> EventSetup:
    """Offline quantities behind the two sampling events of the unconstrained algorithm.

    ρ⁻ is the lowest density of the greedy prefix A(U) (so P_{ρ⁻} = A(U));
    ρ⁺ is the highest density whose I-prefix earns β²(1 - 1/k1)² π(F*).
    The no-dominant-element hypothesis max π(e) <= π(O*)/113 is checked
    with the exact optimum when brute force is allowed, otherwise through
    the lower bound π(O*) >= π(greedy).
    """
    if inst.dims != 1 or inst.feasibility.kind != FREE:
        return EventSetup(False, "events are defined for single-dimensional unconstrained instances")
    beta = to_fraction(beta)
    line = Line.of(inst)
    g = greedy_offline(inst)
    if not g.prefix:
        return EventSetup(False, "greedy prefix is empty")
    best = max(inst.single_profit(e) for e in inst.ids)
    if inst.n <= MAX_N:
        opt = brute_force_opt(inst).best_profit
        ok = 113 * best <= opt
    else:
        opt = g.profit
        ok = 113 * best <= opt
    if not ok:
        return EventSetup(False, "an element carries more than 1/113 of the optimum")
    A = list(g.prefix)
    target = beta**2 * (1 - Fraction(1, k1)) ** 2 * fractional_opt(line).profit
    plus = None
    tr = []
    for e in line.order:
        if e not in line.integral:
            continue
        tr.append(e)
        if line.profit(tr) >= target:
            plus = e
            break
    if plus is None:
        return EventSetup(False, "no density reaches the upper threshold level")
    P_plus = list(tr)
    return EventSetup(True, "ok", A[-1], plus, A, P_plus, line.profit(A), line.profit(P_plus))


def _sample_of(cfg: ExperimentConfig, seed: int) -> set[int]:
    """The sample X the unconstrained algorithm draws under ``seed`` (order, branch coin, then size)."""
    rng = np.random.default_rng(seed)
    perm = trial_order(cfg.instance.ids, rng)
    rng.integers(2)
    k = int(rng.binomial(len(perm), 0.5)) if perm else 0
    return set(perm[:k])


def _events(cfg: ExperimentConfig, setup: EventSetup, X: set[int]) -> tuple[bool, bool]:
    line = Line.of(cfg.instance)
    beta = cfg.default_beta()
    beta_prime = cfg.beta_prime or BETA_PRIME
    e1 = line.profit([e for e in setup.prefix_minus if e in X]) >= beta * setup.profit_minus
    e2 = line.profit([e for e in setup.prefix_plus if e not in X]) >= beta_prime * setup.profit_plus
    return e1, e2


def _prefix_profit_vec(line: Line, members: Sequence[int], index: dict, inX: np.ndarray, take: bool):
    vals = np.array([line.value[e] for e in members], dtype=object)
    sizes = np.array([line.size[e] for e in members], dtype=np.int64)
    cols = np.array([index[e] for e in members], dtype=np.int64)
    mask = inX[:, cols] if take else ~inX[:, cols]
    v = mask.astype(object) @ vals if len(members) else np.zeros(len(inX), dtype=object)
    s = mask.astype(np.int64) @ sizes if len(members) else np.zeros(len(inX), dtype=np.int64)
    return [vi - line.cost.total(int(si)) for vi, si in zip(v, s)]


def event_report(cfg: ExperimentConfig) -> dict:
    """Empirical Pr[E1], Pr[E2], Pr[E1 ∧ E2] over the sample the unconstrained algorithm would draw.

    Each trial replays the algorithm's randomness (order, branch coin,
    sample size) so trial i's events refer to exactly the sample run_unconstrained
    uses under the same seed.
    """
    inst = cfg.instance
    beta = cfg.default_beta()
    beta_prime = cfg.beta_prime or BETA_PRIME
    k1 = cfg.k1 or K1
    setup = event_setup(inst, beta, k1)
    base = {"trials": cfg.trials, "seed": cfg.seed, "beta": float(beta), "beta_prime": float(beta_prime), "k1": k1}
    if not setup.applicable:
        base.update(status="NOT-APPLICABLE", reason=setup.reason)
        return base
    line = Line.of(inst)
    ids = list(inst.ids)
    index = {e: i for i, e in enumerate(ids)}
    n = len(ids)
    inX = np.zeros((cfg.trials, n), dtype=bool)
    for t in range(cfg.trials):
        X = _sample_of(cfg, trial_seed(cfg.seed, t))
        inX[t, [index[e] for e in X]] = True
    px = _prefix_profit_vec(line, setup.prefix_minus, index, inX, True)
    py = _prefix_profit_vec(line, setup.prefix_plus, index, inX, False)
    e1 = [p >= beta * setup.profit_minus for p in px]
    e2 = [p >= beta_prime * setup.profit_plus for p in py]
    both = [a and b for a, b in zip(e1, e2)]
    base.update(
        status="OK",
        rho_minus=str(fmt_rational(line.rho[setup.rho_minus_id])),
        rho_plus=str(fmt_rational(line.rho[setup.rho_plus_id])),
        pr_e1=sum(e1) / cfg.trials,
        pr_e2=sum(e2) / cfg.trials,
        pr_e1_and_e2=sum(both) / cfg.trials,
    )
    return base


def config_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d["instance"] = cfg.instance.to_json()
    d["matroid"] = cfg.matroid.to_json()
    return d

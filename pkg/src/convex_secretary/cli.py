"""Command line entry point: ``convex-secretary <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .constrained import offline_matroid
from .core import Instance, fmt_rational, to_fraction
from .errors import ConfigError, InternalConsistencyError
from .harness import (ExperimentConfig, audit_trace, estimate_cr, event_report, generate_instance, replay,
                      run_algorithm)
from .matroid import Matroid
from .multidim import find_proper_density, offline_matroid_multi, offline_unconstrained_multi
from .offline import fractional_opt, greedy_offline
from .oracle import brute_force_opt
from .sampling import beta_of_c, verify_concentration


def _jsonable(x):
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_jsonable(i) for i in items]
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (int, float, str)) or x is None:
        return x
    try:
        return fmt_rational(x)
    except (TypeError, ValueError, ConfigError):
        return str(x)


def _emit(obj, out: str | None) -> None:
    text = json.dumps(_jsonable(obj), indent=1, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_arg(text: str):
    """Inline JSON object, or the path of a file holding one."""
    if not text.lstrip().startswith("{"):
        with open(text) as fh:
            text = fh.read()
    return json.loads(text)


def _load(args) -> Instance:
    if not args.instance:
        raise ConfigError("--instance is required")
    inst = Instance.load(args.instance)
    if getattr(args, "matroid", None):
        inst = inst.with_feasibility(Matroid.from_json(_json_arg(args.matroid), inst.ids))
    return inst


def _config(args, alg: str) -> ExperimentConfig:
    inst = _load(args)
    return ExperimentConfig(
        alg, inst, trials=args.trials, seed=args.seed, beta=args.beta, k1=args.k1,
        beta_prime=getattr(args, "beta_prime", None), out=args.out,
        oracle=not getattr(args, "no_oracle", False), strict=getattr(args, "strict", False),
        workers=getattr(args, "workers", 1),
    )


def cmd_gen(args):
    spec = _json_arg(args.spec)
    inst = generate_instance(spec, args.seed)
    _emit(inst.to_json(), args.out)


def cmd_oracle(args):
    inst = _load(args)
    r = brute_force_opt(inst)
    _emit({"best_set": r.best_set, "best_profit": r.best_profit, "enumerated": r.enumerated}, args.out)


def cmd_solve_offline(args):
    inst = _load(args)
    multi = inst.dims > 1
    constrained = inst.feasibility.kind != "free"
    if constrained:
        r = offline_matroid_multi(inst) if multi else offline_matroid(inst)
        out = {"algorithm": "matroid", "chosen": r.chosen, "profit": r.profit, "source": r.source}
    elif multi:
        r = offline_unconstrained_multi(inst)
        out = {"algorithm": "greedy-multi", "chosen": r.chosen, "profit": r.profit, "which": r.which}
    else:
        r = greedy_offline(inst)
        f = fractional_opt(inst)
        out = {"algorithm": "greedy", "chosen": r.chosen, "profit": r.profit, "which": r.which.value,
               "fractional": f.to_json(), "fractional_profit": f.profit, "s_star": f.s_star}
    if args.oracle:
        o = brute_force_opt(inst)
        out.update(oracle_profit=o.best_profit, oracle_set=o.best_set)
    _emit(out, args.out)


def cmd_run_online(args):
    cfg = _config(args, args.alg)
    cfg.oracle = False
    rng = np.random.default_rng(args.seed)
    if args.order:
        stream = [int(x) for x in args.order.split(",")]
        if sorted(stream) != sorted(cfg.instance.ids):
            raise ConfigError("--order must be a permutation of the instance ids")
        tr = run_algorithm(cfg, stream, rng, args.seed)
        audit_trace(cfg, stream, tr)
    else:
        tr = replay(cfg, args.seed)
    _emit({"seed": tr.seed, "k": tr.k, "tau": tr.tau, "tau_id": tr.tau_id, "branch": tr.branch,
           "coins": tr.coins, "accepted": tr.accepted, "profit": tr.profit, "info": tr.info}, None)


def cmd_estimate_cr(args):
    cfg = _config(args, args.alg)
    s = estimate_cr(cfg)
    s.pop("records")
    print(json.dumps(_jsonable(s), indent=1, sort_keys=True))


def cmd_event_report(args):
    cfg = _config(args, "2")
    r = event_report(cfg)
    _emit(r, args.out)


def cmd_verify_beta(args):
    b = beta_of_c(args.c)
    _emit({"c": b.c, "y_star": float(b.y_star), "beta": float(b.beta)}, args.out)


def cmd_test_sampling(args):
    weights = [to_fraction(w) for w in args.weights.split(",") if w.strip()]
    p = verify_concentration(weights, args.c, args.trials, np.random.default_rng(args.seed))
    _emit({"c": args.c, "trials": args.trials, "frequency": p, "beta": float(beta_of_c(args.c).beta)}, args.out)


def cmd_proper_density(args):
    inst = _load(args)
    d = find_proper_density(inst, args.element)
    _emit({"id": d.id, "rho": list(d.rho), "pi_level": d.pi_level, "t": list(d.t)}, args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="convex-secretary", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, *flags):
        sp = sub.add_parser(name)
        sp.set_defaults(fn=fn)
        if "instance" in flags:
            sp.add_argument("--instance", help="instance JSON file")
            sp.add_argument("--matroid", help="feasibility JSON (inline or file) overriding the instance's")
        if "run" in flags:
            sp.add_argument("--trials", type=int, default=1000)
            sp.add_argument("--beta", type=to_fraction, default=None)
            sp.add_argument("--k1", type=int, default=None)
            sp.add_argument("--beta-prime", dest="beta_prime", type=to_fraction, default=None)
            sp.add_argument("--strict", action="store_true", help="stop the threshold scan at the first failure")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write output here instead of stdout")
        return sp

    sp = add("gen", cmd_gen)
    sp.add_argument("spec", help='generator spec as inline JSON or a JSON file, e.g. {"family": "uniform", "n": 8}')
    add("oracle", cmd_oracle, "instance")
    sp = add("solve-offline", cmd_solve_offline, "instance")
    sp.add_argument("--oracle", action="store_true", help="also report the brute-force optimum")
    sp = add("run-online", cmd_run_online, "instance", "run")
    sp.add_argument("--alg", required=True, choices=["2", "4", "7", "8", "dynkin"])
    sp.add_argument("--order", help="comma-separated arrival order (default: random from --seed)")
    sp = add("estimate-cr", cmd_estimate_cr, "instance", "run")
    sp.add_argument("--alg", required=True, choices=["2", "4", "7", "8", "dynkin"])
    sp.add_argument("--no-oracle", dest="no_oracle", action="store_true")
    sp.add_argument("--workers", type=int, default=1)
    add("event-report", cmd_event_report, "instance", "run")
    sp = add("verify-beta", cmd_verify_beta)
    sp.add_argument("--c", type=to_fraction, required=True)
    sp = add("test-sampling", cmd_test_sampling)
    sp.add_argument("--weights", required=True, help="comma-separated nonnegative weights")
    sp.add_argument("--c", type=to_fraction, required=True)
    sp.add_argument("--trials", type=int, default=10000)
    sp = add("proper-density", cmd_proper_density, "instance")
    sp.add_argument("--element", type=int, required=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InternalConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())

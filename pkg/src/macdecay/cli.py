"""Command-line front end: ``python3 -m macdecay <command> ...``.

Tabular results go to CSV (header row, preceded by one ``# config=...`` line
holding the resolved configuration), structured objects to JSON with sorted
keys.  Exit status is 0 on success, 1 on validation or budget errors and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import Sequence

from .codes import CodeError, MacCode
from .cyclotomic import CyclotomicError
from .decay import DecayError, DecayQuery, decay_exhaustive, fit_decay_slope, lower_bound_exponents, upper_bound_exponents
from .dmt import DmtError, DmtScenario, eval_at, lower_bound_theta, mac_lower_bound, mac_optimal, optimality_threshold
from .channel import SimConfig, SimError, simulate
from .tower import TowerError, build_tower, catalog_rows

__all__ = ["main", "build_parser", "load_config"]

_VALIDATION_ERRORS = (TowerError, CodeError, CyclotomicError, DecayError, DmtError, SimError, ValueError)


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_tower_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--users", type=int, default=2, help="number of users U")
    p.add_argument("--nt", type=int, default=1, help="transmit antennas per user")
    p.add_argument("--k-kind", choices=["gaussian", "eisenstein"], default="gaussian", help="base field Q(i) or Q(sqrt(-3))")
    p.add_argument("--p", type=_int_list, default=None, help="inert prime a,b in the base field (a + b*i or a + b*sqrt(-3))")
    p.add_argument("--sigma-exp", type=int, default=None, help="exponent realizing sigma on zeta_h")
    p.add_argument("--m", type=int, default=None, help="diagonal exponent m")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="JSON file of option values (keys as in --help, dashes or underscores)")
    p.add_argument("--out", default=None, help="write the result to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macdecay", description="Algebraic MIMO-MAC lattice codes, decay and DMT tools.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list the tower catalog")
    _add_common(p)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--all", action="store_true", help="include the degree 1-2 rows added for small experiments")

    p = sub.add_parser("build-code", help="build a MAC code and emit its JSON descriptor")
    _add_common(p)
    _add_tower_args(p)

    p = sub.add_parser("decay", help="exhaustive decay-function search")
    _add_common(p)
    _add_tower_args(p)
    p.add_argument("--subset", type=_int_list, default=None, help="users in the error set, e.g. 1,2 (default: all)")
    p.add_argument("--bounds", type=_int_list, default=None, help="one bound N per subset user")
    p.add_argument("--series", type=_int_list, default=None, help="run a series over these N values")
    p.add_argument("--vary", type=int, default=None, help="in a series, vary only this user's bound (others 1)")
    p.add_argument("--budget", type=float, default=None, help="node budget (default MACDECAY_BUDGET or 2e9)")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: available CPUs)")

    p = sub.add_parser("bounds", help="exact decay exponents")
    _add_common(p)
    p.add_argument("--users", type=int, required=False, default=None)
    p.add_argument("--nt", type=int, default=1)
    p.add_argument("--k", type=int, default=None, help="code length (default U*nt)")
    p.add_argument("--u", type=int, default=None, help="error-set size (default U)")

    p = sub.add_parser("dmt", help="exact DMT curves and the optimality threshold")
    _add_common(p)
    p.add_argument("--nt", type=int, default=None)
    p.add_argument("--nr", type=int, default=None)
    p.add_argument("--users", type=int, default=None)
    p.add_argument("--sym-sweep", type=int, default=None, help="evaluate both curves on this many grid steps")
    p.add_argument("--threshold", action="store_true", help="print only the optimality threshold")

    p = sub.add_parser("simulate", help="Monte-Carlo ML / bounded-distance simulation")
    _add_common(p)
    _add_tower_args(p)
    p.add_argument("--N", type=_int_list, default=[1], help="per-user coefficient bound")
    p.add_argument("--nr", type=int, default=2)
    p.add_argument("--snr", type=_float_list, default=[5.0, 10.0, 15.0, 20.0], help="SNR points in dB")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-bd", action="store_true", help="skip the bounded-distance decoder")
    p.add_argument("--cap", type=float, default=1e6, help="codebook size cap")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: available CPUs)")

    p = sub.add_parser("verify", help="run randomized lemma suites")
    _add_common(p)
    p.add_argument("--suite", default="lemmas")
    p.add_argument("--seed", type=int, default=0)
    return parser


def load_config(path: str, sub: argparse.ArgumentParser) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {a.dest for a in sub._actions if a.dest not in ("help", "config")}
    out = {}
    for key, val in data.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise ConfigError(f"unknown config key {key!r}")
        out[dest] = val
    return out


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices[name]
    raise KeyError(name)


def _resolved(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("config", "out")}


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows: Sequence[dict], columns: Sequence[str], config: dict | None) -> str:
    buf = io.StringIO()
    if config is not None:
        buf.write("# config=" + json.dumps(config, sort_keys=True, default=str) + "\n")
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=str) + "\n"


def _jobs(args) -> int:
    return args.jobs if args.jobs else (os.cpu_count() or 1)


def _code(args) -> MacCode:
    p = tuple(args.p) if args.p else None
    if p is not None and len(p) != 2:
        raise ConfigError("--p takes two integers a,b")
    spec = build_tower(args.users, args.nt, args.k_kind, p=p, sigma_exp=args.sigma_exp, m=args.m)
    return MacCode(spec, args.m)


# commands ---------------------------------------------------------------------


def cmd_catalog(args) -> int:
    rows = [r for r in catalog_rows() if args.all or r["standard"]]
    if args.format == "json":
        _emit(_json({"config": _resolved(args), "rows": rows}), args.out)
    else:
        cols = ["degree", "field", "h", "p_gaussian", "p_eisenstein", "standard"]
        _emit(_csv(rows, cols, None), args.out)
    return 0


def cmd_build_code(args) -> int:
    code = _code(args)
    desc = code.descriptor()
    desc["config"] = _resolved(args)
    _emit(_json(desc), args.out)
    if args.out:
        print(f"wrote {code!r} ({code.U} users, lattice dimension {code.lattice_dim}) to {args.out}")
    return 0


def cmd_decay(args) -> int:
    code = _code(args)
    subset = tuple(args.subset) if args.subset else tuple(range(1, code.U + 1))
    if args.series:
        queries = []
        for n in args.series:
            if args.vary is None:
                bounds = tuple(n for _ in subset)
            else:
                if args.vary not in subset:
                    raise ConfigError("--vary must name a user in the subset")
                bounds = tuple(n if j == args.vary else 1 for j in subset)
            queries.append(DecayQuery(code, subset, bounds))
    else:
        bounds = tuple(args.bounds) if args.bounds else tuple(1 for _ in subset)
        queries = [DecayQuery(code, subset, bounds)]
    budget = int(args.budget) if args.budget else None
    records = [decay_exhaustive(q, budget=budget, jobs=_jobs(args)) for q in queries]
    cols = ["subset"] + [f"N_{j}" for j in range(1, code.U + 1)] + ["min_det", "witness", "nodes", "seconds"]
    rows = []
    for r in records:
        row = {"subset": " ".join(map(str, r.query.subset))}
        for j in range(1, code.U + 1):
            row[f"N_{j}"] = r.query.bounds[r.query.subset.index(j)] if j in r.query.subset else ""
        row.update(
            min_det=repr(r.value),
            witness=" ".join(str(v) for w in r.witness for v in w),
            nodes=r.nodes,
            seconds=f"{r.seconds:.3f}",
        )
        rows.append(row)
    _emit(_csv(rows, cols, _resolved(args)), args.out)
    if len(records) >= 3:
        fit = fit_decay_slope(records)
        print(f"fitted slope {fit.slope:.4f} (rms residual {fit.residual:.4f})", file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_bounds(args) -> int:
    if args.users is None:
        raise ConfigError("--users is required")
    U, nt = args.users, args.nt
    k = args.k if args.k is not None else U * nt
    u = args.u if args.u is not None else U
    up = upper_bound_exponents(U, nt, k, u)
    lo = lower_bound_exponents(U, nt, u)
    out = {
        "config": _resolved(args),
        "upper": up.as_dict(),
        "lower": {"per_user": lo.per_user, "equal_n": lo.equal_n, "single_varying": lo.single_varying},
    }
    if args.out:
        _emit(_json(out), args.out)
    else:
        print(f"upper bound exponents (position l=1..{u}): " + ", ".join(str(e) for e in up.exponents))
        print(f"alpha = {up.alpha}")
        print(f"lower bound exponent: per user {lo.per_user}, equal N {lo.equal_n}")
    return 0


def cmd_dmt(args) -> int:
    for name in ("nt", "nr", "users"):
        if getattr(args, name) is None:
            raise ConfigError(f"--{name} is required")
    sc = DmtScenario(args.users, args.nt, args.nr)
    if args.threshold:
        thr = optimality_threshold(sc)
        if args.out:
            _emit(_json({"config": _resolved(args), "threshold": str(thr), "decimal": float(thr)}), args.out)
        else:
            print(thr)
        return 0
    lb, opt = mac_lower_bound(sc), mac_optimal(sc)
    cols = ["curve", "r_num", "r_den", "d_num", "d_den", "r", "d"]
    rows = []
    if args.sym_sweep:
        steps = args.sym_sweep
        for name, c in (("optimal", opt), ("lower_bound", lb)):
            for i in range(steps + 1):
                r = c.r_max * Fraction(i, steps)
                d = eval_at(c, r)
                rows.append(dict(zip(cols, [name, r.numerator, r.denominator, d.numerator, d.denominator, float(r), float(d)])))
    else:
        for name, c in (("optimal", opt), ("lower_bound", lb)):
            for row in c.rows():
                rows.append(dict(zip(cols, (name,) + row)))
    _emit(_csv(rows, cols, _resolved(args)), args.out)
    thr = optimality_threshold(sc)
    msg = f"threshold {thr} ({float(thr):.4f}); theta {lower_bound_theta(sc)}"
    print(msg, file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_simulate(args) -> int:
    code = _code(args)
    cfg = SimConfig(
        code,
        tuple(args.N),
        args.nr,
        tuple(args.snr),
        args.trials,
        seed=args.seed,
        cap=int(args.cap),
        bounded_distance=not args.no_bd,
    )
    res = simulate(cfg, jobs=_jobs(args))
    cols = ["snr_db", "trials", "ml_cer", "bd_fail", "ci_halfwidth"]
    rows = [{c: r[c] for c in cols} for r in res.rows()]
    _emit(_csv(rows, cols, _resolved(args)), args.out)
    return 0


def cmd_verify(args) -> int:
    from .verify import run_suite

    results = run_suite(args.suite, args.seed)
    lines = ["# config=" + json.dumps(_resolved(args), sort_keys=True)] + [r.line() for r in results]
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {
    "catalog": cmd_catalog,
    "build-code": cmd_build_code,
    "decay": cmd_decay,
    "bounds": cmd_bounds,
    "dmt": cmd_dmt,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            sub = _subparser(parser, args.command)
            cfg = load_config(args.config, sub)
            sub.set_defaults(**cfg)
            args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except _VALIDATION_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

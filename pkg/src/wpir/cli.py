"""Command-line front end.

Subcommands: ``table`` renders a scheme's option table, ``tradeoff`` emits
leakage/download-cost sweep data as CSV or JSON, ``simulate`` runs a seeded
protocol simulation, ``verify`` cross-checks the closed forms against the
numeric oracle and the optimality conditions, and ``crossover`` locates
where the shorter-message scheme stops beating the full-length one.

Exit codes: 0 on success, 1 when a verification or decode check fails,
2 on usage errors.  Set WPIR_OUTPUT_DIR to give bare output filenames a
default directory.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import optimizer, protocol
from .errors import ConvergenceError, DecodeError, WpirError
from .leakage import as_order
from .optimizer import CostProfile, OracleConfig
from .schemes import (
    SchemeKind,
    SchemeParams,
    build_structure,
    format_db_query,
    structure_to_json,
)

VERIFY_COORD_TOL = 1e-5
VERIFY_OBJECTIVE_TOL = 1e-6
VERIFY_KKT_TOL = 1e-9


def _scheme_params(args) -> SchemeParams:
    kind = SchemeKind(args.scheme)
    if kind is SchemeKind.TSC:
        if args.L is not None and args.L != args.N - 1:
            raise WpirError(f"tsc scheme pins L to N-1 = {args.N - 1}")
        return SchemeParams.tsc(args.N, args.K)
    if args.L is None:
        raise WpirError("the alt scheme needs an explicit -L")
    return SchemeParams.alternative(args.N, args.K, args.L)


def _parse_orders(text: str):
    return [as_order(tok) for tok in text.split(",") if tok.strip()]


def _open_output(args):
    if args.output is None:
        return sys.stdout, False
    path = args.output
    base_dir = os.environ.get("WPIR_OUTPUT_DIR")
    if base_dir and not os.path.isabs(path) and os.sep not in path:
        path = os.path.join(base_dir, path)
    return open(path, "w", encoding="utf-8"), True


def _write(args, text: str) -> None:
    stream, close = _open_output(args)
    try:
        stream.write(text)
        if not text.endswith("\n"):
            stream.write("\n")
    finally:
        if close:
            stream.close()


def _table_rows(structure, at_d):
    params = structure.params
    if at_d is None:
        prob_col = [f"p_{m + 1}" for m in range(structure.n_options)]
    else:
        probs = optimizer.optimal_distribution(
            CostProfile.from_params(params), at_d, optimizer.KL
        ).probs
        prob_col = [f"{p:.12g}" for p in probs]
    rows = []
    for m, option in enumerate(structure.options):
        rows.append(
            [str(m + 1)]
            + [format_db_query(db, empty="-") for db in option.per_database]
            + [prob_col[m], str(option.download_cost)]
        )
    return rows


def cmd_table(args) -> int:
    params = _scheme_params(args)
    structure = build_structure(params, args.theta)
    n = params.n_databases
    if args.format == "json":
        _write(args, structure_to_json(structure))
        return 0
    header = (
        ["option"]
        + [f"database_{i + 1}" for i in range(n)]
        + ["probability", "download_cost"]
    )
    rows = _table_rows(structure, args.at_D)
    if args.format == "csv":
        lines = [",".join(header)] + [",".join(r) for r in rows]
        _write(args, "\n".join(lines))
        return 0
    # pretty: aligned columns, unicode empty-set marker
    pretty_rows = [
        [cell if cell != "-" else "∅" for cell in row] for row in rows
    ]
    head = ["Option"] + [f"Database {i + 1}" for i in range(n)] + ["Probability", "Cost"]
    widths = [
        max(len(head[c]), *(len(r[c]) for r in pretty_rows))
        for c in range(len(head))
    ]
    lines = [" | ".join(h.ljust(w) for h, w in zip(head, widths))]
    lines.append("-+-".join("-" * w for w in widths))
    for row in pretty_rows:
        lines.append(" | ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    _write(args, "\n".join(lines))
    return 0


def cmd_tradeoff(args) -> int:
    kinds = ["tsc", "alt"] if args.scheme == "both" else [args.scheme]
    orders = _parse_orders(args.orders)
    points = []
    for kind in kinds:
        if kind == "tsc":
            schemes = [SchemeParams.tsc(args.N, args.K)]
        elif args.L is not None:
            schemes = [SchemeParams.alternative(args.N, args.K, args.L)]
        else:
            schemes = [
                SchemeParams.alternative(args.N, args.K, ell)
                for ell in range(1, args.N - 1)
            ]
        for params in schemes:
            profile = CostProfile.from_params(params)
            points.extend(
                optimizer.sweep_tradeoff(
                    profile,
                    orders,
                    args.points,
                    include_maximal_leakage=args.maximal_leakage,
                )
            )
    if args.format == "json":
        _write(args, optimizer.points_to_json(points, units=args.units))
    else:
        _write(args, optimizer.points_to_csv(points, units=args.units))
    return 0


def _distribution_for(args, profile: CostProfile) -> np.ndarray:
    if args.distribution == "uniform":
        return np.full(profile.n_options, 1.0 / profile.n_options)
    if args.distribution == "optimal":
        if args.target_D is None:
            raise WpirError("--distribution optimal needs --target-D")
        return optimizer.optimal_distribution(profile, args.target_D, optimizer.KL).probs
    raise WpirError(f"unknown distribution {args.distribution!r}")


def cmd_simulate(args) -> int:
    params = _scheme_params(args)
    profile = CostProfile.from_params(params)
    probs = _distribution_for(args, profile)
    structures = [
        build_structure(params, theta) for theta in range(1, params.n_messages + 1)
    ]
    store = protocol.random_store(params, args.seed)
    sink = open(args.transcripts, "w", encoding="utf-8") if args.transcripts else None
    try:
        report = protocol.simulate(
            store,
            structures,
            probs,
            n_trials=args.trials,
            seed=args.seed,
            orders=_parse_orders(args.orders),
            transcript_sink=sink,
        )
    finally:
        if sink is not None:
            sink.close()
    _write(args, report.to_json())
    return 0


def _verify_grid(args):
    if args.grid == "small":
        specs = [("tsc", 3, 2, None), ("alt", 3, 2, 1)]
    else:
        specs = [
            ("tsc", 3, 2, None),
            ("tsc", 4, 2, None),
            ("alt", 3, 2, 1),
            ("alt", 4, 2, 1),
            ("alt", 4, 2, 2),
        ]
    for kind, n, k, ell in specs:
        if kind == "tsc":
            yield SchemeParams.tsc(n, k)
        else:
            yield SchemeParams.alternative(n, k, ell)


def cmd_verify(args) -> int:
    orders = _parse_orders(args.orders)
    cfg = OracleConfig(seed=args.seed)
    failures = 0
    rows = []
    for params in _verify_grid(args):
        profile = CostProfile.from_params(params)
        d_lo, d_hi = optimizer.feasible_cost_range(profile, "theorem")
        grid = np.linspace(d_lo, d_hi, args.points + 2)[1:-1]
        for d in grid:
            d = float(d)
            for order in orders:
                closed = optimizer.optimal_distribution(profile, d, order).probs
                if args.perturb:
                    closed = closed.copy()
                    closed[0] += args.perturb
                    closed[1] -= args.perturb
                rho = optimizer.tradeoff_leakage(profile, d, order)
                report = optimizer.kkt_check(profile, closed, d, order)
                kkt_res = report.max_residual
                oracle = optimizer.numeric_oracle(profile, d, order, cfg)
                obj_err = abs(oracle.objective_nats - rho)
                coord_err = (
                    float(np.abs(oracle.probs - closed).max())
                    if not order.is_max
                    else float("nan")
                )
                ok = obj_err <= VERIFY_OBJECTIVE_TOL and kkt_res <= VERIFY_KKT_TOL
                if not order.is_max:
                    ok = ok and coord_err <= VERIFY_COORD_TOL
                failures += 0 if ok else 1
                rows.append(
                    (params.label, f"{d:.4f}", order.label, coord_err, obj_err, kkt_res, ok)
                )
    print(f"{'scheme':<18} {'D':>7} {'alpha':>6} {'coord_err':>11} {'obj_err':>11} {'kkt_res':>11}  status")
    for label, d, alpha, coord, obj, kkt, ok in rows:
        coord_s = f"{coord:.2e}" if not math.isnan(coord) else "-"
        print(
            f"{label:<18} {d:>7} {alpha:>6} {coord_s:>11} {obj:>11.2e} {kkt:>11.2e}  "
            f"{'ok' if ok else 'FAIL'}"
        )
    print(f"{len(rows)} checks, {failures} failures")
    return 1 if failures else 0


def cmd_crossover(args) -> int:
    if args.N < 3:
        raise WpirError("crossover needs N >= 3 so a shorter-message scheme exists")
    orders = _parse_orders(args.orders)
    metrics = (
        ["renyi", "normalized", "maximal"] if args.metric == "all" else [args.metric]
    )
    results = []
    for ell in range(1, args.N - 1):
        for metric in metrics:
            for order in orders:
                if metric == "maximal" and not order.is_kl:
                    continue
                res = optimizer.find_crossover(
                    args.N, args.K, ell, order=order, metric=metric
                )
                results.append((ell, metric, order.label, res))
    lines = [f"{'L':>3} {'metric':>12} {'alpha':>6} {'D*':>12}  dominance region"]
    for ell, metric, alpha, res in results:
        if res.exists:
            lines.append(
                f"{ell:>3} {metric:>12} {alpha:>6} {res.d_star:>12.8f}  "
                f"shorter scheme leads on [1, {res.d_star:.8f})"
            )
        else:
            lines.append(
                f"{ell:>3} {metric:>12} {alpha:>6} {'none':>12}  no crossover in "
                f"[{res.d_low:.6f}, {res.d_high:.6f}]"
            )
    _write(args, "\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wpir",
        description="Probabilistic PIR schemes and leakage/download-cost tradeoffs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scheme_args(p, with_theta=False):
        p.add_argument("--scheme", choices=["tsc", "alt"], required=True)
        p.add_argument("-N", type=int, required=True, help="number of databases")
        p.add_argument("-K", type=int, required=True, help="number of messages")
        p.add_argument("-L", type=int, default=None, help="message length (alt scheme)")
        if with_theta:
            p.add_argument("--theta", type=int, default=1, help="desired message index")

    p_table = sub.add_parser("table", help="render a scheme's option table")
    add_scheme_args(p_table, with_theta=True)
    p_table.add_argument("--at-D", type=float, default=None, dest="at_D",
                         help="fill the probability column at this download cost")
    p_table.add_argument("--format", choices=["pretty", "csv", "json"], default="pretty")
    p_table.add_argument("-o", "--output", default=None)

    p_trade = sub.add_parser("tradeoff", help="emit tradeoff sweep data")
    p_trade.add_argument("--scheme", choices=["tsc", "alt", "both"], required=True)
    p_trade.add_argument("-N", type=int, required=True)
    p_trade.add_argument("-K", type=int, required=True)
    p_trade.add_argument("-L", type=int, default=None,
                         help="alt message length (default: every valid length)")
    p_trade.add_argument("--orders", default="1,2,inf")
    p_trade.add_argument("--points", type=int, default=100)
    p_trade.add_argument("--normalize", action="store_true",
                         help="normalized leakage is always included in the "
                              "leakage_normalized column; kept for symmetry")
    p_trade.add_argument("--maximal-leakage", action="store_true")
    p_trade.add_argument("--units", choices=["nats", "bits"], default="nats")
    p_trade.add_argument("--format", choices=["csv", "json"], default="csv")
    p_trade.add_argument("-o", "--output", default=None)

    p_sim = sub.add_parser("simulate", help="run a seeded protocol simulation")
    add_scheme_args(p_sim)
    p_sim.add_argument("--distribution", choices=["uniform", "optimal"], default="uniform")
    p_sim.add_argument("--target-D", type=float, default=None, dest="target_D")
    p_sim.add_argument("--trials", type=int, default=10_000)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--orders", default="1,2,inf")
    p_sim.add_argument("--transcripts", default=None,
                       help="also stream one JSON line per trial to this file")
    p_sim.add_argument("-o", "--output", default=None)

    p_verify = sub.add_parser("verify", help="oracle and optimality cross-checks")
    p_verify.add_argument("--grid", choices=["small", "default"], default="default")
    p_verify.add_argument("--points", type=int, default=4, help="interior D values per scheme")
    p_verify.add_argument("--orders", default="0.5,1,2,5,inf")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--perturb", type=float, default=0.0,
                          help="negative control: shift this much mass between two "
                               "options before checking")

    p_cross = sub.add_parser("crossover", help="locate scheme crossover points")
    p_cross.add_argument("-N", type=int, required=True)
    p_cross.add_argument("-K", type=int, required=True)
    p_cross.add_argument("--orders", default="1")
    p_cross.add_argument("--metric", choices=["renyi", "normalized", "maximal", "all"],
                         default="renyi")
    p_cross.add_argument("-o", "--output", default=None)

    return parser


_COMMANDS = {
    "table": cmd_table,
    "tradeoff": cmd_tradeoff,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "crossover": cmd_crossover,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (DecodeError, ConvergenceError) as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except WpirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line harness.

Subcommands: generate, solve-aon, solve-dl, oracle, table, sweep, compare.
Shared flags: --seed, --step, --qub-mode, --out, --format.  Exit code 0 on
success; on failure a JSON error summary goes to stderr and the exit code is
nonzero.
"""
from __future__ import annotations

import argparse
import json
import sys

from .aon import solve_all_or_nothing
from .errors import SelectiveNewsvendorError
from .experiments import (
    ExperimentConfig,
    SWEEP_PARAMETERS,
    TRACE_SCHEMA,
    compare_search_methods,
    emit_csv,
    run_sweep,
    run_table_experiment,
)
from .generate import GenSpec, generate_instance, load_instance, save_instance
from .model import validate_instance
from .oracle import oracle_all_or_nothing, oracle_fixed_price, oracle_joint
from .search import SearchConfig, run_price_search


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="root seed")
    parser.add_argument("--step", type=float, default=0.5, help="price step size")
    parser.add_argument(
        "--qub-mode",
        choices=("effective", "global"),
        default="effective",
        help="lead-time bound handling in the price search",
    )
    parser.add_argument("--out", default=None, help="output file path")
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="row output format"
    )


def _add_instance_source(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--instance", default=None, help="instance file to load")
    parser.add_argument("--size", choices=("small", "large"), default="small")
    parser.add_argument("--agents", type=int, default=None)
    parser.add_argument("--customers", type=int, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snp",
        description="Selective newsvendor solvers and experiment harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a seeded instance file")
    _add_instance_source(p)
    _add_shared(p)

    p = sub.add_parser("solve-aon", help="solve the all-or-nothing model")
    _add_instance_source(p)
    _add_shared(p)

    p = sub.add_parser("solve-dl", help="solve the joint price/assignment model")
    _add_instance_source(p)
    _add_shared(p)

    p = sub.add_parser("oracle", help="brute-force reference solve (tiny instances)")
    _add_instance_source(p)
    p.add_argument("--price", type=float, default=None,
                   help="fixed selling price; omit for the joint oracle")
    _add_shared(p)

    p = sub.add_parser("table", help="run the benchmark grid of one size class")
    p.add_argument("--size", choices=("small", "large"), default="small")
    _add_shared(p)

    p = sub.add_parser("sweep", help="run one sensitivity sweep")
    p.add_argument("--param", choices=SWEEP_PARAMETERS, required=True)
    p.add_argument("--values", default=None,
                   help="comma-separated scalar overrides for the swept values")
    _add_shared(p)

    p = sub.add_parser("compare", help="compare the two searches on one instance")
    _add_instance_source(p)
    _add_shared(p)
    return parser


def _search_config(args) -> SearchConfig:
    return SearchConfig(step_size=args.step, q_bound_mode=args.qub_mode)


def _resolve_instance(args):
    if args.instance:
        return load_instance(args.instance)
    spec = GenSpec(
        size_class=args.size,
        seed=args.seed,
        n_agents=args.agents,
        n_customers=args.customers,
    )
    return generate_instance(spec)


def _emit_rows(result, args) -> None:
    if args.format == "json":
        payload = {"rows": result.rows, "errors": result.errors}
        text = json.dumps(payload, indent=2)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as handle:
                handle.write(text + "\n")
        else:
            print(text)
        return
    if not args.out:
        raise SelectiveNewsvendorError("--out is required for CSV output")
    emit_csv(result.rows, result.schema, args.out)
    print(f"wrote {len(result.rows)} rows to {args.out}")
    for row_id, message in result.errors:
        print(f"row {row_id} failed: {message}", file=sys.stderr)


def _joint_summary(solution) -> dict:
    metrics = solution.metrics
    return {
        "profit": solution.profit,
        "R_star": solution.price,
        "Q_star": solution.quantity,
        "D": solution.demands.total,
        "delta_QD": solution.quantity_demand_gap,
        "R_ub": solution.price_upper_bound,
        "n_selected": solution.assignment.n_selected,
        "regime": solution.regime,
        "M1": metrics.mean_fill_ratio if metrics else None,
        "M2": metrics.order_coverage if metrics else None,
        "M3": metrics.served_share if metrics else None,
        "subproblems": solution.trace.subproblems_solved if solution.trace else None,
        "jumps": solution.trace.jumps_taken if solution.trace else None,
        "terminal_reason": solution.trace.terminal_reason if solution.trace else None,
    }


def _cmd_generate(args) -> int:
    inst = _resolve_instance(args)
    if not args.out:
        raise SelectiveNewsvendorError("generate requires --out")
    save_instance(inst, args.out)
    print(f"wrote instance ({inst.n_agents} agents, {inst.n_customers} customers) to {args.out}")
    return 0


def _cmd_solve_aon(args) -> int:
    inst = _resolve_instance(args)
    solution = solve_all_or_nothing(inst)
    print(json.dumps({
        "profit": solution.profit,
        "Q_star": solution.quantity,
        "n_selected": solution.assignment.n_selected,
    }, indent=2))
    return 0


def _cmd_solve_dl(args) -> int:
    inst = _resolve_instance(args)
    solution = run_price_search(inst, _search_config(args))
    print(json.dumps(_joint_summary(solution), indent=2))
    if args.out:
        rows = [
            {
                "method": "r_search",
                "iteration": k,
                "R": rec.price,
                "profit": rec.profit,
                "Q_minus_D": rec.quantity - rec.demand_total,
            }
            for k, rec in enumerate(solution.trace.records, start=1)
        ]
        emit_csv(rows, TRACE_SCHEMA, args.out)
        print(f"wrote {len(rows)} trace rows to {args.out}", file=sys.stderr)
    return 0


def _cmd_oracle(args) -> int:
    inst = _resolve_instance(args)
    if args.price is not None:
        report = oracle_fixed_price(inst, args.price)
        best = report.best
        payload = {
            "price": best.price,
            "profit": best.profit,
            "Q_star": best.quantity,
            "D": best.demands.total,
            "regime": best.regime,
            "n_selected": best.n_selected,
            "candidates_enumerated": report.candidates_enumerated,
        }
    else:
        report = oracle_joint(inst, price_step=args.step)
        payload = _joint_summary(report.best)
        payload["candidates_enumerated"] = report.candidates_enumerated
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_table(args) -> int:
    cfg = ExperimentConfig(
        kind="table-grid",
        size_class=args.size,
        seed=args.seed,
        search=_search_config(args),
        output_path=args.out,
        output_format=args.format,
    )
    _emit_rows(run_table_experiment(cfg), args)
    return 0


def _cmd_sweep(args) -> int:
    values = None
    if args.values:
        values = tuple(float(v) for v in args.values.split(","))
    cfg = ExperimentConfig(
        kind="sweep",
        seed=args.seed,
        sweep_parameter=args.param,
        sweep_values=values,
        search=_search_config(args),
        output_path=args.out,
        output_format=args.format,
    )
    _emit_rows(run_sweep(cfg), args)
    return 0


def _cmd_compare(args) -> int:
    inst = _resolve_instance(args)
    result = compare_search_methods(inst, _search_config(args))
    print(json.dumps(result.summary, indent=2))
    if args.out:
        emit_csv(result.trace_rows, TRACE_SCHEMA, args.out)
        print(f"wrote {len(result.trace_rows)} trace rows to {args.out}", file=sys.stderr)
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "solve-aon": _cmd_solve_aon,
    "solve-dl": _cmd_solve_dl,
    "oracle": _cmd_oracle,
    "table": _cmd_table,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SelectiveNewsvendorError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())

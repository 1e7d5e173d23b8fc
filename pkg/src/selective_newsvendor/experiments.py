"""Experiment harness: benchmark grids, sensitivity sweeps, search comparison, CSV.

Row schemas follow the reporting layout of the benchmark tables: instance
id and shape, profit, optimal price and quantity, wall time, the price upper
bound, total demand, the quantity-demand gap, and the three fulfilment
ratios.  Sweeps insert the swept value as a second column.  All rows are
deterministic functions of (config, seed) except the wall-time column.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace

from .errors import SelectiveNewsvendorError
from .generate import (
    GenSpec,
    LARGE_AGENT_COUNTS,
    LARGE_CUSTOMER_COUNTS,
    SMALL_AGENT_COUNTS,
    SMALL_CUSTOMER_COUNTS,
    WAITING_RULE_TWICE_MEAN,
    generate_instance,
)
from .model import Instance
from .rng import derive_seed
from .search import JointSolution, SearchConfig, run_grid_search, run_price_search

TABLE_SCHEMA = (
    "id", "I", "J", "profit", "R_star", "Q_star", "T",
    "R_ub", "D", "delta_QD", "M1", "M2", "M3",
)
TRACE_SCHEMA = ("method", "iteration", "R", "profit", "Q_minus_D")

SWEEP_PARAMETERS = (
    "market_size",
    "agent_capacity",
    "price_scale",
    "base_price",
    "prod_cost",
    "unit_prod_time",
    "service_level",
    "waiting_time",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One harness run: what to execute and how to write it out."""

    kind: str = "table-grid"       # table-grid | sweep | compare | single
    size_class: str = "small"
    seed: int = 0
    n_agents: int | None = None
    n_customers: int | None = None
    sweep_parameter: str | None = None
    sweep_values: tuple | None = None   # override of the stock value list
    search: SearchConfig = field(default_factory=SearchConfig)
    output_path: str | None = None
    output_format: str = "csv"          # csv | json

    def __post_init__(self):
        if self.sweep_parameter is not None and self.sweep_parameter not in SWEEP_PARAMETERS:
            raise ValueError(
                f"unknown sweep parameter {self.sweep_parameter!r}; "
                f"expected one of {SWEEP_PARAMETERS}"
            )
        if self.sweep_values is not None and len(self.sweep_values) == 0:
            raise ValueError("sweep_values must be non-empty when given")


@dataclass
class ExperimentResult:
    schema: tuple[str, ...]
    rows: list[dict]
    solutions: list[JointSolution | None]
    errors: list[tuple[int, str]]


def _solution_cells(solution: JointSolution, wall_time: float) -> dict:
    metrics = solution.metrics
    return {
        "profit": solution.profit,
        "R_star": solution.price,
        "Q_star": solution.quantity,
        "T": wall_time,
        "R_ub": solution.price_upper_bound,
        "D": solution.demands.total,
        "delta_QD": solution.quantity_demand_gap,
        "M1": metrics.mean_fill_ratio if metrics else math.nan,
        "M2": metrics.order_coverage if metrics else math.nan,
        "M3": metrics.served_share if metrics else math.nan,
    }


def _failed_cells() -> dict:
    return {key: math.nan for key in TABLE_SCHEMA[3:]}


def run_table_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """One row per (agents, customers) grid point of the requested size class."""
    if cfg.size_class == "small":
        agent_counts, customer_counts = SMALL_AGENT_COUNTS, SMALL_CUSTOMER_COUNTS
    elif cfg.size_class == "large":
        agent_counts, customer_counts = LARGE_AGENT_COUNTS, LARGE_CUSTOMER_COUNTS
    else:
        raise ValueError(f"table grids exist for 'small' and 'large', not {cfg.size_class!r}")
    result = ExperimentResult(TABLE_SCHEMA, [], [], [])
    row_id = 0
    for n_agents in agent_counts:
        for n_customers in customer_counts:
            row_id += 1
            row = {"id": row_id, "I": n_agents, "J": n_customers}
            try:
                spec = GenSpec(
                    size_class=cfg.size_class,
                    seed=derive_seed(cfg.seed, n_agents, n_customers),
                    n_agents=n_agents,
                    n_customers=n_customers,
                )
                inst = generate_instance(spec)
                started = time.perf_counter()
                solution = run_price_search(inst, cfg.search)
                row.update(_solution_cells(solution, time.perf_counter() - started))
                result.solutions.append(solution)
            except SelectiveNewsvendorError as exc:
                row.update(_failed_cells())
                result.solutions.append(None)
                result.errors.append((row_id, str(exc)))
            result.rows.append(row)
    return result


@dataclass(frozen=True)
class _SweepPlan:
    mode: str                      # scalar | mean_range | capacity_range | waiting
    values: tuple
    n_agents: int
    n_customers: int
    force_service_level: float | None = None
    scalar_field: str | None = None


def _float_steps(lo: float, hi: float, step: float) -> tuple[float, ...]:
    count = int(round((hi - lo) / step)) + 1
    return tuple(round(lo + k * step, 10) for k in range(count))


_SWEEP_PLANS = {
    "market_size": _SweepPlan(
        "mean_range", ((8.0, 12.0), (10.0, 20.0), (15.0, 25.0), (30.0, 50.0)), 4, 50
    ),
    "agent_capacity": _SweepPlan(
        "capacity_range", ((5, 10), (10, 15), (15, 20), (20, 30)), 4, 100,
        force_service_level=0.0,
    ),
    "price_scale": _SweepPlan(
        "scalar", _float_steps(0.1, 1.4, 0.1), 4, 50, scalar_field="price_scale"
    ),
    "base_price": _SweepPlan(
        "scalar", _float_steps(95.0, 150.0, 5.0), 4, 50, scalar_field="base_price"
    ),
    "prod_cost": _SweepPlan(
        "scalar", _float_steps(50.0, 80.0, 5.0), 4, 50, scalar_field="prod_cost"
    ),
    "unit_prod_time": _SweepPlan(
        "scalar", _float_steps(0.1, 0.5, 0.1), 4, 50, scalar_field="unit_prod_time"
    ),
    "service_level": _SweepPlan(
        "scalar", _float_steps(0.0, 1.0, 0.01), 4, 50, scalar_field="service_level"
    ),
    "waiting_time": _SweepPlan(
        "waiting", ((10.0, 20.0), (10.0, 30.0), (10.0, 40.0), (10.0, 50.0)), 4, 50,
        force_service_level=0.0,
    ),
}


def _format_sweep_value(value) -> str:
    if isinstance(value, tuple):
        lo, hi = value
        lo = int(lo) if float(lo).is_integer() else lo
        hi = int(hi) if float(hi).is_integer() else hi
        return f"U[{lo},{hi}]"
    return _format_cell(value)


def _sweep_shape(plan: _SweepPlan, cfg: ExperimentConfig) -> tuple[int, int]:
    n_agents = cfg.n_agents if cfg.n_agents is not None else plan.n_agents
    n_customers = cfg.n_customers if cfg.n_customers is not None else plan.n_customers
    return n_agents, n_customers


def _sweep_instance(plan: _SweepPlan, cfg: ExperimentConfig, base: Instance | None, value):
    if plan.mode == "scalar":
        return replace(base, **{plan.scalar_field: float(value)})
    n_agents, n_customers = _sweep_shape(plan, cfg)
    spec = GenSpec(
        size_class="custom",
        seed=cfg.seed,
        n_agents=n_agents,
        n_customers=n_customers,
        unit_prod_time=0.1,
        service_level=plan.force_service_level,
    )
    if plan.mode == "mean_range":
        spec = replace(spec, mean_range=(float(value[0]), float(value[1])))
    elif plan.mode == "capacity_range":
        spec = replace(spec, capacity_range=(int(value[0]), int(value[1])))
    elif plan.mode == "waiting":
        spec = replace(
            spec,
            mean_range=(float(value[0]), float(value[1])),
            waiting_rule=WAITING_RULE_TWICE_MEAN,
        )
    return generate_instance(spec)


def run_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """Vary one parameter over its stock (or overridden) value list.

    The non-swept draws are identical across rows: scalar parameters are
    replaced on a single base instance, drawn parameters use their own
    dedicated substream.
    """
    if cfg.sweep_parameter is None:
        raise ValueError("sweep requires a sweep_parameter")
    plan = _SWEEP_PLANS[cfg.sweep_parameter]
    values = cfg.sweep_values if cfg.sweep_values is not None else plan.values
    if len(values) == 0:
        raise ValueError("empty sweep value list")
    schema = (TABLE_SCHEMA[0], cfg.sweep_parameter) + TABLE_SCHEMA[1:]
    result = ExperimentResult(schema, [], [], [])

    n_agents, n_customers = _sweep_shape(plan, cfg)
    base = None
    if plan.mode == "scalar":
        base = generate_instance(
            GenSpec(
                size_class="small",
                seed=cfg.seed,
                n_agents=n_agents,
                n_customers=n_customers,
                service_level=plan.force_service_level,
            )
        )
    for row_id, value in enumerate(values, start=1):
        row = {
            "id": row_id,
            cfg.sweep_parameter: _format_sweep_value(value),
            "I": n_agents,
            "J": n_customers,
        }
        try:
            inst = _sweep_instance(plan, cfg, base, value)
            started = time.perf_counter()
            solution = run_price_search(inst, cfg.search)
            row.update(_solution_cells(solution, time.perf_counter() - started))
            result.solutions.append(solution)
        except SelectiveNewsvendorError as exc:
            row.update(_failed_cells())
            result.solutions.append(None)
            result.errors.append((row_id, str(exc)))
        result.rows.append(row)
    return result


@dataclass
class CompareResult:
    summary: dict
    trace_rows: list[dict]
    accelerated: JointSolution
    sequential: JointSolution


def compare_search_methods(inst: Instance, search: SearchConfig) -> CompareResult:
    """Run the jump-accelerated and grid searches side by side on one instance."""
    accelerated = run_price_search(inst, search)
    sequential = run_grid_search(inst, search)
    n_fast = accelerated.trace.subproblems_solved
    n_grid = sequential.trace.subproblems_solved
    summary = {
        "r_search": {
            "profit": accelerated.profit,
            "R_star": accelerated.price,
            "Q_star": accelerated.quantity,
            "subproblems": n_fast,
            "jumps": accelerated.trace.jumps_taken,
        },
        "sequential": {
            "profit": sequential.profit,
            "R_star": sequential.price,
            "Q_star": sequential.quantity,
            "subproblems": n_grid,
        },
        "reduction_ratio": 1.0 - n_fast / n_grid if n_grid else math.nan,
    }
    trace_rows = []
    for method, solution in (("r_search", accelerated), ("sequential", sequential)):
        for k, rec in enumerate(solution.trace.records, start=1):
            trace_rows.append(
                {
                    "method": method,
                    "iteration": k,
                    "R": rec.price,
                    "profit": rec.profit,
                    "Q_minus_D": rec.quantity - rec.demand_total,
                }
            )
    return CompareResult(summary, trace_rows, accelerated, sequential)


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value != value:
            return "nan"
        return f"{value:.6g}"
    raise TypeError(f"cannot format {value!r} into a CSV cell")


def emit_csv(rows: list[dict], schema, path) -> None:
    """Write rows under the schema header; reals carry 6 significant digits."""
    for row in rows:
        missing = [key for key in schema if key not in row]
        if missing:
            raise ValueError(f"row is missing columns {missing}")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(schema)
        for row in rows:
            writer.writerow([_format_cell(row[key]) for key in schema])

"""Descending price search for the joint price / assignment / quantity problem.

Two searches share the fixed-price solver:

* :func:`run_price_search` walks the price down from its upper bound in fixed
  steps while the order quantity sits below its lead-time bound; once the
  bound binds it re-centers the price at the closed-form stationary point of
  the (concave, quadratic) profit for the current selection, which typically
  lands on the optimum in one hop.
* :func:`run_grid_search` evaluates every grid point in the whole range, as a
  baseline for subproblem-count comparisons.

The ``q_bound_mode`` switch picks how the lead-time bound is read:
``effective`` (default) compares the quantity against the served set's own
cap and re-centers only when a genuine shortage shows the cap is binding;
``global`` treats the all-customers cap as a hard quantity ceiling and
re-centers whenever the quantity reaches it, shortage or not, mirroring the
printed form of the algorithm this search descends from.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, SearchRangeError
from .fixed_r import FixedPriceSolution, solve_fixed_price
from .model import (
    QTY_TOL,
    Assignment,
    DemandVector,
    Instance,
    Metrics,
    ProfitBreakdown,
    REGIME_BALANCED,
    REGIME_SHORTAGE,
    compute_metrics,
    min_required_selection,
    order_cap_global,
)

BOUND_MODE_EFFECTIVE = "effective"
BOUND_MODE_GLOBAL = "global"

STOP_PRICE_BELOW_RANGE = "R <= R_lb"
STOP_REFINED_ABOVE = "R' > R"
STOP_FLAG = "stop flag"
STOP_ITERATION_CAP = "iteration cap"


@dataclass(frozen=True)
class SearchConfig:
    """Tuning knobs for the price searches."""

    step_size: float = 0.5
    price_floor: float | None = None    # defaults to the shortage cost
    q_bound_mode: str = BOUND_MODE_EFFECTIVE
    max_iterations: int | None = None   # defaults to 10x the grid length

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be > 0")
        if self.q_bound_mode not in (BOUND_MODE_EFFECTIVE, BOUND_MODE_GLOBAL):
            raise ValueError(f"unknown q_bound_mode {self.q_bound_mode!r}")
        if self.price_floor is not None and self.price_floor < 0:
            raise ValueError("price_floor must be >= 0")


@dataclass(frozen=True)
class IterationRecord:
    """One evaluated price along a search."""

    price: float
    feasible: bool
    profit: float
    quantity: float
    demand_total: float
    n_selected: int
    regime: str
    jumped_here: bool   # price reached via a stationary-point hop


@dataclass(frozen=True)
class SearchTrace:
    records: tuple[IterationRecord, ...]
    subproblems_solved: int   # feasible fixed-price solves
    jumps_taken: int
    terminal_reason: str


@dataclass(frozen=True)
class JointSolution:
    """Best solution found by a search (or certified by the oracle)."""

    price: float
    quantity: float
    assignment: Assignment
    demands: DemandVector
    breakdown: ProfitBreakdown
    regime: str
    metrics: Metrics | None        # None when nothing is served
    quantity_demand_gap: float     # quantity - total demand
    price_upper_bound: float
    trace: SearchTrace | None

    @property
    def profit(self) -> float:
        return self.breakdown.total


def price_upper_bound(inst: Instance) -> float:
    """Highest price at which the service-level floor can still be met.

    Serving a customer requires its best effort-scaled mean to cover the
    price-driven demand loss; the floor forces the selection down to the
    customers with the largest such values, so the binding one is the
    (need)-th largest.  With a floor of zero the loosest in-range bound (the
    overall largest value) is used.
    """
    best_pair = np.max(inst.effort * inst.customer_means[None, :], axis=0)
    ranked = np.sort(best_pair)
    n = inst.n_customers
    need = min_required_selection(n, inst.service_level)
    index = min(max(n - need + 1, 1), n)  # 1-based position in ascending order
    return float(ranked[index - 1]) / inst.price_scale + inst.base_price


def stationary_price(inst: Instance, assignment: Assignment, regime: str) -> float:
    """Stationary point of the profit in price for a fixed selection.

    Valid while the order quantity rides its lead-time cap: the profit is a
    concave quadratic in the price, with the balanced and shortage regimes
    giving different linear terms.
    """
    if assignment.n_selected == 0:
        raise ValueError("stationary price undefined for an empty selection")
    idx = np.array(assignment.customers, dtype=np.int64)
    agents = np.array([assignment.by_customer[j] for j in idx], dtype=np.int64)
    scaled = float(np.sum(inst.effort[agents, idx] * inst.customer_means[idx]))
    base = scaled / (2.0 * inst.price_scale * assignment.n_selected)
    if regime == REGIME_BALANCED:
        return base + inst.base_price / 2.0
    if regime == REGIME_SHORTAGE:
        return base + (inst.base_price + inst.shortage_cost) / 2.0
    raise ValueError(f"no stationary-price form for regime {regime!r}")


def _resolve_range(inst: Instance, cfg: SearchConfig) -> tuple[float, float]:
    upper = price_upper_bound(inst)
    floor = cfg.price_floor if cfg.price_floor is not None else inst.shortage_cost
    if upper <= floor:
        raise SearchRangeError(
            f"empty search range: price upper bound {upper:.6g} <= floor {floor:.6g}"
        )
    return upper, floor


def _q_cap_for_mode(inst: Instance, cfg: SearchConfig) -> float | None:
    return order_cap_global(inst) if cfg.q_bound_mode == BOUND_MODE_GLOBAL else None


def _infeasible_record(price: float, jumped: bool) -> IterationRecord:
    return IterationRecord(
        price=price,
        feasible=False,
        profit=math.nan,
        quantity=math.nan,
        demand_total=math.nan,
        n_selected=0,
        regime="infeasible",
        jumped_here=jumped,
    )


def _record(price: float, sol: FixedPriceSolution, jumped: bool) -> IterationRecord:
    return IterationRecord(
        price=price,
        feasible=True,
        profit=sol.profit,
        quantity=sol.quantity,
        demand_total=sol.demands.total,
        n_selected=sol.n_selected,
        regime=sol.regime,
        jumped_here=jumped,
    )


def _build_solution(
    inst: Instance,
    best: FixedPriceSolution,
    upper: float,
    trace: SearchTrace,
) -> JointSolution:
    metrics = None
    if best.n_selected > 0:
        metrics = compute_metrics(inst, best.assignment, best.quantity, best.demands)
    return JointSolution(
        price=best.price,
        quantity=best.quantity,
        assignment=best.assignment,
        demands=best.demands,
        breakdown=best.breakdown,
        regime=best.regime,
        metrics=metrics,
        quantity_demand_gap=best.quantity - best.demands.total,
        price_upper_bound=upper,
        trace=trace,
    )


def _pick_best(solutions: list[FixedPriceSolution]) -> FixedPriceSolution:
    best = None
    for sol in solutions:
        if best is None or sol.profit > best.profit:
            best = sol
    return best


def run_price_search(inst: Instance, cfg: SearchConfig | None = None) -> JointSolution:
    """Jump-accelerated descending price search; returns the best solution found."""
    cfg = cfg or SearchConfig()
    upper, floor = _resolve_range(inst, cfg)
    step = cfg.step_size
    max_iter = cfg.max_iterations
    if max_iter is None:
        max_iter = int(math.ceil(10.0 * (upper - floor) / step)) + 10
    q_cap = _q_cap_for_mode(inst, cfg)
    global_cap = order_cap_global(inst)
    total_capacity = int(np.sum(inst.capacities_array))

    records: list[IterationRecord] = []
    solutions: list[FixedPriceSolution] = []
    jumps = 0
    stop_flag = False
    pending_jump = False
    terminal = None
    price = upper
    iterations = 0
    while price > floor + 1e-12:
        iterations += 1
        if iterations > max_iter:
            terminal = STOP_ITERATION_CAP
            break
        try:
            sol = solve_fixed_price(inst, price, q_cap=q_cap)
        except InfeasibleError:
            records.append(_infeasible_record(price, pending_jump))
            pending_jump = False
            price -= step
            continue
        records.append(_record(price, sol, pending_jump))
        solutions.append(sol)
        pending_jump = False

        if cfg.q_bound_mode == BOUND_MODE_EFFECTIVE:
            # The quantity is capped exactly when a shortage shows up.
            do_refine = sol.regime == REGIME_SHORTAGE
        else:
            bound = global_cap
            at_bound = math.isfinite(bound) and sol.quantity >= bound - QTY_TOL
            do_refine = at_bound
        if not do_refine:
            price -= step
            continue

        regime = (
            REGIME_SHORTAGE
            if sol.demands.total - sol.quantity > QTY_TOL
            else REGIME_BALANCED
        )
        refined = stationary_price(inst, sol.assignment, regime)
        if refined > price:
            terminal = STOP_REFINED_ABOVE
            break
        if stop_flag:
            terminal = STOP_FLAG
            break
        if price - refined <= 1e-12:
            # Re-centering would revisit the same price forever; the printed
            # control flow has no exit for this, so report it as a cap hit.
            terminal = STOP_ITERATION_CAP
            break
        if sol.n_selected == inst.n_customers or sol.n_selected >= total_capacity:
            stop_flag = True
        price = refined
        jumps += 1
        pending_jump = True
    if terminal is None:
        terminal = STOP_PRICE_BELOW_RANGE

    if not solutions:
        raise InfeasibleError("every fixed-price subproblem in the range is infeasible")
    trace = SearchTrace(
        records=tuple(records),
        subproblems_solved=len(solutions),
        jumps_taken=jumps,
        terminal_reason=terminal,
    )
    return _build_solution(inst, _pick_best(solutions), upper, trace)


def run_grid_search(inst: Instance, cfg: SearchConfig | None = None) -> JointSolution:
    """Evaluate every grid price from the upper bound down to the floor inclusive."""
    cfg = cfg or SearchConfig()
    upper, floor = _resolve_range(inst, cfg)
    step = cfg.step_size
    q_cap = _q_cap_for_mode(inst, cfg)
    n_points = int(math.floor((upper - floor) / step + 1e-9)) + 1

    records: list[IterationRecord] = []
    solutions: list[FixedPriceSolution] = []
    for k in range(n_points):
        price = upper - k * step
        try:
            sol = solve_fixed_price(inst, price, q_cap=q_cap)
        except InfeasibleError:
            records.append(_infeasible_record(price, False))
            continue
        records.append(_record(price, sol, False))
        solutions.append(sol)
    if not solutions:
        raise InfeasibleError("every fixed-price subproblem in the range is infeasible")
    trace = SearchTrace(
        records=tuple(records),
        subproblems_solved=len(solutions),
        jumps_taken=0,
        terminal_reason=STOP_PRICE_BELOW_RANGE,
    )
    return _build_solution(inst, _pick_best(solutions), upper, trace)

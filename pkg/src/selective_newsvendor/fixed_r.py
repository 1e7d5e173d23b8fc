"""Exact solver for the price-linked model at a fixed selling price.

With the price fixed, the remaining problem picks an assignment and an order
quantity under the service-level, capacity, lead-time and non-negativity
constraints.  Structure exploited:

1.  For a fixed assignment the profit in the order quantity has slope
    ``shortage_cost - prod_cost > 0`` below total demand and
    ``salvage_price - prod_cost < 0`` above it, so the optimal quantity is
    ``min(total demand, lead-time cap of the selection)``.
2.  At prices at or above the shortage cost, profit at a fixed lead-time cap
    is nondecreasing in total demand, so for a given cap it suffices to
    maximize total sold units -- a max-weight capacitated assignment over the
    per-pair sold quantities (pairs with negative quantity are unusable).
3.  The lead-time cap only depends on the smallest waiting time among served
    customers, so sweeping a threshold down the distinct waiting times and
    keeping customers with waiting time at or above it covers every
    assignment at the threshold where its own cap is exact, where its score
    is its true profit.  Scores at other thresholds are profits of feasible
    (just quantity-curtailed) solutions, so the best-scoring threshold is the
    global optimum.

Prices below the shortage cost break step 2's monotonicity; those fall back
to exhaustive enumeration on small instances and error otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assignment import CapacitatedMatcher
from .errors import InfeasibleError
from .model import (
    PROFIT_TIE_TOL,
    QTY_TOL,
    VALUE_TOL,
    Assignment,
    DemandVector,
    Instance,
    ProfitBreakdown,
    compute_demands,
    detect_regime,
    min_required_selection,
    order_cap_for_selection,
    pair_demand_matrix,
    profit_from_totals,
)

_FALLBACK_MAX_CUSTOMERS = 12
_FALLBACK_MAX_MAPS = 10**7


@dataclass(frozen=True)
class FixedPriceSolution:
    """Optimal assignment and order quantity for one fixed selling price."""

    price: float
    assignment: Assignment
    quantity: float
    demands: DemandVector
    breakdown: ProfitBreakdown
    regime: str            # balanced | shortage | salvage
    lead_time_cap: float   # largest quantity deliverable to the served set
    n_selected: int

    @property
    def profit(self) -> float:
        return self.breakdown.total


def optimal_order_quantity(inst: Instance, assignment: Assignment, price: float) -> float:
    """Profit-maximizing order quantity for a fixed assignment and price."""
    demands = compute_demands(inst, assignment, price)
    cap = order_cap_for_selection(inst, assignment)
    return max(0.0, min(demands.total, cap))


class _Candidate:
    __slots__ = ("profit", "demand_total", "vector", "quantity")

    def __init__(self, profit, demand_total, vector, quantity):
        self.profit = profit
        self.demand_total = demand_total
        self.vector = vector
        self.quantity = quantity


def _lex_smaller(a: np.ndarray, b: np.ndarray) -> bool:
    diff = np.flatnonzero(a != b)
    if diff.size == 0:
        return False
    return a[diff[0]] < b[diff[0]]


def _better(cand: _Candidate, best: _Candidate | None) -> bool:
    """Deterministic preference: profit (ties at tolerance), then total sold,
    then lexicographically smaller assignment vector (unserved sorting first,
    then lower agent id)."""
    if best is None:
        return True
    if abs(cand.profit - best.profit) > PROFIT_TIE_TOL:
        return cand.profit > best.profit
    if cand.demand_total != best.demand_total:
        return cand.demand_total > best.demand_total
    return _lex_smaller(cand.vector, best.vector)


def _score(inst, vector, cap, price, pair_qty) -> _Candidate:
    values = np.zeros(inst.n_customers)
    served = np.flatnonzero(vector >= 0)
    if served.size:
        values[served] = pair_qty[vector[served], served]
    demand_total = float(np.sum(values))
    quantity = min(demand_total, cap)
    breakdown = profit_from_totals(inst, demand_total, quantity, price)
    return _Candidate(breakdown.total, demand_total, vector.copy(), quantity)


def _finalize(inst, price, cand: _Candidate) -> FixedPriceSolution:
    assignment = Assignment.from_vector(cand.vector)
    demands = compute_demands(inst, assignment, price)
    breakdown = profit_from_totals(inst, demands.total, cand.quantity, price)
    return FixedPriceSolution(
        price=price,
        assignment=assignment,
        quantity=cand.quantity,
        demands=demands,
        breakdown=breakdown,
        regime=detect_regime(demands.total, cand.quantity),
        lead_time_cap=order_cap_for_selection(inst, assignment),
        n_selected=assignment.n_selected,
    )


def solve_fixed_price(
    inst: Instance, price: float, q_cap: float | None = None
) -> FixedPriceSolution:
    """Globally optimal assignment and order quantity at a fixed selling price.

    ``q_cap`` optionally imposes a hard global ceiling on the order quantity
    (the all-customers lead-time cap), which is how the verbatim printed
    search variant treats the lead-time bound.

    Raises :class:`InfeasibleError` when fewer customers are eligible than
    the service level requires, or aggregate agent capacity is short.
    """
    if price <= 0:
        raise ValueError("selling price must be > 0")
    if price < inst.shortage_cost - VALUE_TOL:
        return _solve_by_enumeration(inst, price, q_cap)

    n_customers = inst.n_customers
    need = min_required_selection(n_customers, inst.service_level)
    total_capacity = int(np.minimum(inst.capacities_array, n_customers).sum())
    if total_capacity < need:
        raise InfeasibleError(
            f"aggregate agent capacity {total_capacity} cannot serve the "
            f"required {need} customers"
        )

    pair_qty = pair_demand_matrix(inst, price)
    pair_ok = pair_qty >= 0.0
    customer_ok = pair_ok.any(axis=0) & (inst.waiting_times >= inst.ship_time)
    eligible = np.flatnonzero(customer_ok)
    if eligible.size < need:
        raise InfeasibleError(
            f"only {eligible.size} customers are eligible at price {price:.6g}; "
            f"the service level requires {need}"
        )
    if eligible.size == 0:
        empty = _Candidate(0.0, 0.0, np.full(n_customers, -1, dtype=np.int64), 0.0)
        return _finalize(inst, price, empty)

    # Customers join in descending waiting-time order; after each distinct
    # waiting time the matcher holds the optimum for that threshold's pool.
    order = sorted(eligible, key=lambda j: (-inst.waiting_times[j], j))
    matcher = CapacitatedMatcher(pair_qty, inst.capacities_array, pair_ok)
    best: _Candidate | None = None
    pos = 0
    while pos < len(order):
        threshold = float(inst.waiting_times[order[pos]])
        while pos < len(order) and inst.waiting_times[order[pos]] == threshold:
            matcher.add_customer(order[pos])
            pos += 1
        cap = max(0.0, (threshold - inst.ship_time) / inst.unit_prod_time)
        if q_cap is not None:
            cap = min(cap, q_cap)
        state = matcher
        if state.n_assigned < need:
            trial = matcher.clone()
            feasible = True
            while trial.n_assigned < need:
                if not trial.force_one():
                    feasible = False
                    break
            if not feasible:
                continue  # not enough placeable customers at this threshold
            state = trial
        cand = _score(inst, state.assignment_vector(), cap, price, pair_qty)
        if _better(cand, best):
            best = cand
    if best is None:
        raise InfeasibleError(
            f"no threshold admits {need} served customers at price {price:.6g}"
        )
    return _finalize(inst, price, best)


def _assignment_map_chunks(n_agents: int, n_customers: int, limit: int, chunk: int = 1 << 15):
    """Yield (chunk, customers) arrays of agent codes; code n_agents = unserved."""
    base = n_agents + 1
    total = base**n_customers
    if total > limit:
        raise InfeasibleError  # callers guard first; defensive
    powers = base ** np.arange(n_customers, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % base


def _solve_by_enumeration(inst, price, q_cap) -> FixedPriceSolution:
    """Exhaustive fallback for prices below the shortage cost (tiny instances only)."""
    n_agents, n_customers = inst.n_agents, inst.n_customers
    total_maps = (n_agents + 1) ** n_customers
    if n_customers > _FALLBACK_MAX_CUSTOMERS or total_maps > _FALLBACK_MAX_MAPS:
        raise ValueError(
            "prices below the shortage cost require exhaustive search, "
            f"which is limited to {_FALLBACK_MAX_CUSTOMERS} customers"
        )
    need = min_required_selection(n_customers, inst.service_level)
    pair_qty = pair_demand_matrix(inst, price)
    qty_ext = np.vstack([pair_qty, np.zeros((1, n_customers))])
    caps = inst.capacities_array
    wq = (inst.waiting_times - inst.ship_time) / inst.unit_prod_time
    cols = np.arange(n_customers)

    best: _Candidate | None = None
    for maps in _assignment_map_chunks(n_agents, n_customers, _FALLBACK_MAX_MAPS):
        served = maps < n_agents
        loads = (maps[:, :, None] == np.arange(n_agents)[None, None, :]).sum(axis=1)
        values = qty_ext[maps, cols[None, :]]
        q_eff = np.where(served, wq[None, :], np.inf).min(axis=1)
        feasible = (
            (loads <= caps[None, :]).all(axis=1)
            & (served.sum(axis=1) >= need)
            & (values >= 0.0).all(axis=1)
            & np.where(served, inst.waiting_times[None, :] >= inst.ship_time, True).all(axis=1)
        )
        if not feasible.any():
            continue
        demand_total = values.sum(axis=1)
        cap = q_eff if q_cap is None else np.minimum(q_eff, q_cap)
        quantity = np.maximum(np.minimum(demand_total, cap), 0.0)
        over = quantity - demand_total
        profit = (
            price * demand_total
            - inst.prod_cost * quantity
            + np.where(over > 0.0, inst.salvage_price * over, 0.0)
            - np.where(over < 0.0, inst.shortage_cost * (demand_total - quantity), 0.0)
        )
        for row in np.flatnonzero(feasible):
            vec = np.where(maps[row] < n_agents, maps[row], -1).astype(np.int64)
            cand = _Candidate(
                float(profit[row]), float(demand_total[row]), vec, float(quantity[row])
            )
            if _better(cand, best):
                best = cand
    if best is None:
        raise InfeasibleError(
            f"no feasible assignment at price {price:.6g} "
            f"(service level requires {need} customers)"
        )
    return _finalize(inst, price, best)

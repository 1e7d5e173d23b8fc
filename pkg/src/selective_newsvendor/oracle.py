"""Brute-force reference solvers for certifying the structural solvers.

Every assignment map (each customer to one agent or to nobody) is enumerated
and filtered against the constraints; quantities and prices are then chosen
by direct reasoning on the per-assignment profit function rather than by the
threshold machinery the production solvers use, so agreement between the two
is meaningful cross-validation.  Hard size guards keep these honest: they are
for tiny instances only.

For the joint problem the per-assignment profit in price is piecewise
quadratic (a balanced piece where the quantity tracks demand and a shortage
piece where it rides the lead-time cap), so each assignment contributes its
clipped stationary points and piece boundaries as candidate prices, plus a
shared safety grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationSizeError, InfeasibleError
from .fixed_r import FixedPriceSolution, optimal_order_quantity
from .model import (
    PROFIT_TIE_TOL,
    Assignment,
    Instance,
    compute_demands,
    compute_metrics,
    detect_regime,
    min_required_selection,
    order_cap_for_selection,
    profit_all_or_nothing,
    profit_from_totals,
)
from .aon import AllOrNothingSolution
from .search import JointSolution, price_upper_bound

DEFAULT_MAP_LIMIT = 10**7
_CHUNK = 1 << 15


@dataclass(frozen=True)
class OracleReport:
    """Best solution plus the enumeration effort that certified it."""

    best: object
    candidates_enumerated: int
    bounds: dict


def _map_chunks(n_agents: int, n_customers: int, limit: int):
    """Yield (rows, customers) arrays of agent codes; code n_agents = unserved."""
    base = n_agents + 1
    total = base**n_customers
    if total > limit:
        raise EnumerationSizeError(
            f"{total} assignment maps exceed the enumeration guard of {limit}"
        )
    powers = base ** np.arange(n_customers, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % base


def _structure_feasible(inst: Instance, maps: np.ndarray, need: int) -> np.ndarray:
    """Capacity, cardinality and waiting-vs-shipping feasibility per map row."""
    n_agents = inst.n_agents
    served = maps < n_agents
    loads = (maps[:, :, None] == np.arange(n_agents)[None, None, :]).sum(axis=1)
    ok = (loads <= inst.capacities_array[None, :]).all(axis=1)
    ok &= served.sum(axis=1) >= need
    wait_ok = inst.waiting_times[None, :] >= inst.ship_time
    ok &= np.where(served, wait_ok, True).all(axis=1)
    return ok


def _lex_key(maps_row: np.ndarray, n_agents: int) -> np.ndarray:
    return np.where(maps_row < n_agents, maps_row, -1).astype(np.int64)


def _lex_smaller(a: np.ndarray, b: np.ndarray) -> bool:
    diff = np.flatnonzero(a != b)
    return bool(diff.size) and a[diff[0]] < b[diff[0]]


def _fixed_better(cand, best) -> bool:
    """Profit (ties at tolerance), then total demand, then lexicographic key."""
    if abs(cand[0] - best[0]) > PROFIT_TIE_TOL:
        return cand[0] > best[0]
    if cand[1] != best[1]:
        return cand[1] > best[1]
    return _lex_smaller(cand[2], best[2])


def oracle_fixed_price(
    inst: Instance, price: float, limit: int = DEFAULT_MAP_LIMIT
) -> OracleReport:
    """Exhaustively certified optimum at one fixed selling price."""
    n_agents, n_customers = inst.n_agents, inst.n_customers
    need = min_required_selection(n_customers, inst.service_level)
    qty_ext = np.vstack(
        [
            inst.effort * inst.customer_means[None, :]
            - inst.price_scale * (price - inst.base_price),
            np.zeros((1, n_customers)),
        ]
    )
    wq = (inst.waiting_times - inst.ship_time) / inst.unit_prod_time
    cols = np.arange(n_customers)

    total = (n_agents + 1) ** n_customers
    best = None  # (profit, demand_total, lex_key, quantity)
    for maps in _map_chunks(n_agents, n_customers, limit):
        served = maps < n_agents
        values = qty_ext[maps, cols[None, :]]
        feasible = _structure_feasible(inst, maps, need)
        feasible &= (values >= 0.0).all(axis=1)
        if not feasible.any():
            continue
        demand_total = values.sum(axis=1)
        q_eff = np.where(served, wq[None, :], np.inf).min(axis=1)
        quantity = np.minimum(demand_total, q_eff)
        over = quantity - demand_total
        profit = (
            price * demand_total
            - inst.prod_cost * quantity
            + np.where(over > 0.0, inst.salvage_price * over, 0.0)
            - np.where(over < 0.0, inst.shortage_cost * (demand_total - quantity), 0.0)
        )
        profit = np.where(feasible, profit, -np.inf)
        top = profit.max()
        ties = np.flatnonzero(profit >= top - PROFIT_TIE_TOL)
        for row in ties:
            key = _lex_key(maps[row], n_agents)
            cand = (float(profit[row]), float(demand_total[row]), key, float(quantity[row]))
            if best is None or _fixed_better(cand, best):
                best = cand
    if best is None:
        raise InfeasibleError(
            f"no feasible assignment at price {price:.6g} "
            f"(service level requires {need} customers)"
        )
    assignment = Assignment.from_vector(best[2])
    demands = compute_demands(inst, assignment, price)
    breakdown = profit_from_totals(inst, demands.total, best[3], price)
    solution = FixedPriceSolution(
        price=price,
        assignment=assignment,
        quantity=best[3],
        demands=demands,
        breakdown=breakdown,
        regime=detect_regime(demands.total, best[3]),
        lead_time_cap=order_cap_for_selection(inst, assignment),
        n_selected=assignment.n_selected,
    )
    return OracleReport(
        best=solution,
        candidates_enumerated=total,
        bounds={"price": price, "assignment_maps": total},
    )


def oracle_joint(
    inst: Instance,
    price_step: float = 0.5,
    price_floor: float | None = None,
    limit: int = DEFAULT_MAP_LIMIT,
) -> OracleReport:
    """Exhaustively certified optimum of the joint price/assignment problem.

    Per feasible assignment the price is maximized analytically on each
    profit piece (stationary points clipped to the piece, piece boundaries),
    with a safety grid of pitch ``price_step`` on top.
    """
    if price_step <= 0:
        raise ValueError("price_step must be > 0")
    n_agents, n_customers = inst.n_agents, inst.n_customers
    need = min_required_selection(n_customers, inst.service_level)
    floor = price_floor if price_floor is not None else inst.shortage_cost
    upper = price_upper_bound(inst)
    lam = inst.price_scale
    base = inst.base_price

    scaled_ext = np.vstack(
        [inst.effort * inst.customer_means[None, :], np.zeros((1, n_customers))]
    )
    wq = (inst.waiting_times - inst.ship_time) / inst.unit_prod_time
    cols = np.arange(n_customers)
    n_grid = max(0, int(math.floor((upper - floor) / price_step + 1e-9)))
    grid = floor + price_step * np.arange(n_grid + 1)
    grid = np.append(grid, upper)

    total = (n_agents + 1) ** n_customers
    best = None  # (profit, price, demand_total, lex_key)
    for maps in _map_chunks(n_agents, n_customers, limit):
        feasible = _structure_feasible(inst, maps, need)
        served = maps < n_agents
        n_served = served.sum(axis=1)
        if need == 0:
            # The empty selection earns zero profit at any price; anchor it
            # at the upper bound where a descending search would record it.
            empty_rows = feasible & (n_served == 0)
            for row in np.flatnonzero(empty_rows):
                key = _lex_key(maps[row], n_agents)
                cand = (0.0, upper, 0.0, key)
                if best is None or _joint_better(cand, best):
                    best = cand
        rows = np.flatnonzero(feasible & (n_served > 0))
        if rows.size == 0:
            continue
        sub = maps[rows]
        served = sub < n_agents
        n = served.sum(axis=1).astype(float)
        pair_scaled = scaled_ext[sub, cols[None, :]]
        scaled_sum = pair_scaled.sum(axis=1)
        min_scaled = np.where(served, pair_scaled, np.inf).min(axis=1)
        q_eff = np.where(served, wq[None, :], np.inf).min(axis=1)

        r_max = base + min_scaled / lam
        with np.errstate(invalid="ignore"):
            r_cap = np.where(
                np.isfinite(q_eff),
                base + (scaled_sum - q_eff) / (lam * n),
                -np.inf,
            )
        stationary = scaled_sum / (2.0 * lam * n)
        r_bal = np.clip(stationary + (base + inst.prod_cost) / 2.0,
                        np.maximum(floor, r_cap), r_max)
        r_short = np.clip(stationary + (base + inst.shortage_cost) / 2.0,
                          floor, np.minimum(r_cap, r_max))
        cand_prices = np.concatenate(
            [
                np.stack([r_bal, r_short, r_cap, r_max, np.full(rows.size, floor)], axis=1),
                np.broadcast_to(grid, (rows.size, grid.size)),
            ],
            axis=1,
        )
        valid = (cand_prices >= floor - 1e-9) & (cand_prices <= r_max[:, None] + 1e-9)
        demand = scaled_sum[:, None] - lam * n[:, None] * (cand_prices - base)
        demand = np.maximum(demand, 0.0)
        quantity = np.minimum(demand, q_eff[:, None])
        over = quantity - demand
        profit = (
            cand_prices * demand
            - inst.prod_cost * quantity
            + np.where(over > 0.0, inst.salvage_price * over, 0.0)
            - np.where(over < 0.0, inst.shortage_cost * (demand - quantity), 0.0)
        )
        profit = np.where(valid, profit, -np.inf)
        flat_best = profit.max(axis=1)
        chunk_top = flat_best.max()
        if not np.isfinite(chunk_top):
            continue
        if best is not None and chunk_top < best[0] - PROFIT_TIE_TOL:
            continue
        floor_profit = chunk_top if best is None else min(chunk_top, best[0])
        for k in np.flatnonzero(flat_best >= floor_profit - PROFIT_TIE_TOL):
            row = rows[k]
            ties = np.flatnonzero(profit[k] >= flat_best[k] - PROFIT_TIE_TOL)
            pick = ties[np.argmax(cand_prices[k][ties])]
            key = _lex_key(maps[row], n_agents)
            cand = (
                float(flat_best[k]),
                float(cand_prices[k][pick]),
                float(demand[k][pick]),
                key,
            )
            if best is None or _joint_better(cand, best):
                best = cand
    if best is None:
        raise InfeasibleError(
            "no feasible assignment over the whole price range "
            f"(service level requires {need} customers)"
        )
    assignment = Assignment.from_vector(best[3])
    price = best[1]
    demands = compute_demands(inst, assignment, price)
    quantity = optimal_order_quantity(inst, assignment, price)
    breakdown = profit_from_totals(inst, demands.total, quantity, price)
    metrics = None
    if assignment.n_selected > 0:
        metrics = compute_metrics(inst, assignment, quantity, demands)
    solution = JointSolution(
        price=price,
        quantity=quantity,
        assignment=assignment,
        demands=demands,
        breakdown=breakdown,
        regime=detect_regime(demands.total, quantity),
        metrics=metrics,
        quantity_demand_gap=quantity - demands.total,
        price_upper_bound=upper,
        trace=None,
    )
    return OracleReport(
        best=solution,
        candidates_enumerated=total,
        bounds={
            "price_floor": floor,
            "price_upper": upper,
            "price_step": price_step,
            "assignment_maps": total,
        },
    )


def _joint_better(cand, best) -> bool:
    """Profit first (ties at tolerance), then the higher price (a descending
    search keeps the first maximum it meets), then total demand, then the
    lexicographic key."""
    if abs(cand[0] - best[0]) > PROFIT_TIE_TOL:
        return cand[0] > best[0]
    if cand[1] != best[1]:
        return cand[1] > best[1]
    if cand[2] != best[2]:
        return cand[2] > best[2]
    return _lex_smaller(cand[3], best[3])


def oracle_all_or_nothing(
    inst: Instance, limit: int = DEFAULT_MAP_LIMIT
) -> OracleReport:
    """Exhaustively certified optimum of the all-or-nothing model."""
    n_agents, n_customers = inst.n_agents, inst.n_customers
    scaled_ext = np.vstack(
        [inst.effort * inst.customer_means[None, :], np.zeros((1, n_customers))]
    )
    cols = np.arange(n_customers)
    margin_revenue = inst.base_price
    total = (n_agents + 1) ** n_customers
    best = None  # (profit, sold_total, lex_key)
    for maps in _map_chunks(n_agents, n_customers, limit):
        served = maps < n_agents
        loads = (maps[:, :, None] == np.arange(n_agents)[None, None, :]).sum(axis=1)
        feasible = (loads <= inst.capacities_array[None, :]).all(axis=1)
        feasible &= served.any(axis=1)  # a positive order quantity is required
        if not feasible.any():
            continue
        sold = scaled_ext[maps, cols[None, :]].sum(axis=1)
        profit = margin_revenue * sold - inst.prod_cost * sold + 0.0
        profit = np.where(feasible, profit, -np.inf)
        top = profit.max()
        ties = np.flatnonzero(profit >= top - PROFIT_TIE_TOL)
        for row in ties:
            key = _lex_key(maps[row], n_agents)
            cand = (float(profit[row]), float(sold[row]), key)
            if best is None or _fixed_better(cand, best):
                best = cand
    if best is None:
        raise InfeasibleError(
            "no feasible assignment with a positive order quantity "
            "(zero aggregate agent capacity)"
        )
    assignment = Assignment.from_vector(best[2])
    quantity = best[1]
    breakdown = profit_all_or_nothing(inst, assignment, quantity)
    sold_vec = scaled_ext[np.where(best[2] >= 0, best[2], n_agents), cols]
    solution = AllOrNothingSolution(
        assignment=assignment,
        quantity=quantity,
        breakdown=breakdown,
        sold=sold_vec,
    )
    return OracleReport(
        best=solution,
        candidates_enumerated=total,
        bounds={"assignment_maps": total},
    )

"""Core domain types and pure evaluation functions.

An :class:`Instance` couples a sales force (per-agent customer capacities and
a per-pair effort matrix) with a customer market (mean demands, delivery
waiting times) and single-season economics (production cost, salvage price,
emergency shortage cost, price-sensitive demand).  Everything here is a pure
function of its arguments; the solvers build on these primitives.

Two profit models are evaluated:

* all-or-nothing: each served customer buys exactly its effort-scaled mean,
  the selling price is the fixed base price, and shortage is forbidden;
* price-linked: a served customer buys its effort-scaled mean minus
  ``price_scale * (price - base_price)`` units, unmet demand is covered by an
  emergency supplier at the shortage cost, and leftovers are salvaged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NegativeDemandError

#: absolute tolerance for generic real comparisons
VALUE_TOL = 1e-9
#: tolerance for regime detection (order quantity vs demand vs lead-time cap)
QTY_TOL = 1e-6
#: profits closer than this are ties, resolved by demand then lexicographic rank
#: (profit arithmetic carries ~1e-12 float noise at benchmark magnitudes)
PROFIT_TIE_TOL = 1e-9

REGIME_BALANCED = "balanced"
REGIME_SHORTAGE = "shortage"
REGIME_SALVAGE = "salvage"


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """One selling-season planning problem.

    ``effort`` has shape (agents, customers); entry (i, j) scales customer
    j's mean demand when agent i handles the account.
    """

    agent_capacities: tuple[int, ...]
    customer_means: np.ndarray
    waiting_times: np.ndarray
    effort: np.ndarray
    unit_prod_time: float      # supplier days per unit ordered
    ship_time: float           # fixed shipping days
    prod_cost: float
    salvage_price: float
    shortage_cost: float       # per-unit emergency sourcing cost
    price_scale: float         # units of demand lost per currency unit above base price
    base_price: float
    service_level: float       # minimum fraction of customers that must be served
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(
            self, "agent_capacities", tuple(int(g) for g in self.agent_capacities)
        )
        object.__setattr__(self, "customer_means", _frozen_array(self.customer_means))
        object.__setattr__(self, "waiting_times", _frozen_array(self.waiting_times))
        object.__setattr__(self, "effort", _frozen_array(np.atleast_2d(self.effort)))
        for name in (
            "unit_prod_time", "ship_time", "prod_cost", "salvage_price",
            "shortage_cost", "price_scale", "base_price", "service_level",
        ):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def n_agents(self) -> int:
        return len(self.agent_capacities)

    @property
    def n_customers(self) -> int:
        return len(self.customer_means)

    @cached_property
    def capacities_array(self) -> np.ndarray:
        return _frozen_array(self.agent_capacities, dtype=np.int64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.agent_capacities == other.agent_capacities
            and np.array_equal(self.customer_means, other.customer_means)
            and np.array_equal(self.waiting_times, other.waiting_times)
            and np.array_equal(self.effort, other.effort)
            and self.unit_prod_time == other.unit_prod_time
            and self.ship_time == other.ship_time
            and self.prod_cost == other.prod_cost
            and self.salvage_price == other.salvage_price
            and self.shortage_cost == other.shortage_cost
            and self.price_scale == other.price_scale
            and self.base_price == other.base_price
            and self.service_level == other.service_level
            and self.meta == other.meta
        )


@dataclass(frozen=True)
class Assignment:
    """Partial map of customers to agents; a customer absent from the map is not served."""

    pairs: tuple[tuple[int, int], ...]  # (customer, agent), sorted by customer

    @classmethod
    def from_map(cls, mapping) -> "Assignment":
        return cls(tuple(sorted((int(j), int(i)) for j, i in dict(mapping).items())))

    @classmethod
    def from_vector(cls, vector) -> "Assignment":
        """Build from a per-customer agent vector with -1 marking unserved."""
        return cls(tuple((j, int(a)) for j, a in enumerate(vector) if a >= 0))

    @classmethod
    def empty(cls) -> "Assignment":
        return cls(())

    @cached_property
    def by_customer(self) -> dict[int, int]:
        return dict(self.pairs)

    def agent_of(self, customer: int) -> int | None:
        return self.by_customer.get(customer)

    @property
    def customers(self) -> tuple[int, ...]:
        return tuple(j for j, _ in self.pairs)

    @property
    def n_selected(self) -> int:
        return len(self.pairs)

    def vector(self, n_customers: int) -> np.ndarray:
        vec = np.full(n_customers, -1, dtype=np.int64)
        for j, i in self.pairs:
            vec[j] = i
        return vec

    def agent_loads(self, n_agents: int) -> np.ndarray:
        loads = np.zeros(n_agents, dtype=np.int64)
        for _, i in self.pairs:
            loads[i] += 1
        return loads

    def check(self, inst: Instance) -> list[str]:
        """Report capacity/index violations against an instance (empty = valid)."""
        problems = []
        seen = set()
        for j, i in self.pairs:
            if not 0 <= j < inst.n_customers:
                problems.append(f"customer index {j} out of range")
            if not 0 <= i < inst.n_agents:
                problems.append(f"agent index {i} out of range")
            if j in seen:
                problems.append(f"customer {j} assigned more than once")
            seen.add(j)
        loads = {}
        for _, i in self.pairs:
            loads[i] = loads.get(i, 0) + 1
        for i, used in sorted(loads.items()):
            if 0 <= i < inst.n_agents and used > inst.agent_capacities[i]:
                problems.append(
                    f"agent {i} handles {used} customers, capacity {inst.agent_capacities[i]}"
                )
        return problems


@dataclass(frozen=True)
class DemandVector:
    """Per-customer units sold (zero for unserved customers) and their total."""

    values: np.ndarray
    total: float

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        object.__setattr__(self, "total", float(self.total))


@dataclass(frozen=True)
class ProfitBreakdown:
    """Season profit split into its components.

    ``total = revenue - production_cost + salvage_credit - shortage_penalty``;
    at most one of salvage_credit / shortage_penalty is nonzero.
    """

    revenue: float
    production_cost: float
    salvage_credit: float
    shortage_penalty: float
    total: float


@dataclass(frozen=True)
class Metrics:
    """Fulfilment ratios: per-served-customer fill, order vs market size, served share."""

    mean_fill_ratio: float   # average of sold/mean over served customers
    order_coverage: float    # order quantity over total market mean demand
    served_share: float      # served customers over all customers


def validate_instance(inst: Instance) -> list[str]:
    """Return a list of invariant violations; an empty list means the instance is valid."""
    problems = []
    n_agents, n_customers = inst.n_agents, inst.n_customers
    if n_agents == 0:
        problems.append("agent_capacities: at least one agent required")
    if n_customers == 0:
        problems.append("customer_means: at least one customer required")
    if any(g < 1 for g in inst.agent_capacities):
        problems.append("agent_capacities: every capacity must be a positive integer")
    if np.any(inst.customer_means <= 0):
        problems.append("customer_means: every mean demand must be > 0")
    if np.any(inst.waiting_times <= 0):
        problems.append("waiting_times: every waiting time must be > 0")
    if inst.effort.shape != (n_agents, n_customers):
        problems.append(
            f"effort: shape {inst.effort.shape} does not match "
            f"(agents, customers) = ({n_agents}, {n_customers})"
        )
    elif np.any(inst.effort <= 0):
        problems.append("effort: every entry must be > 0")
    if inst.unit_prod_time <= 0:
        problems.append("unit_prod_time: must be > 0")
    if inst.ship_time < 0:
        problems.append("ship_time: must be >= 0")
    for name in ("prod_cost", "salvage_price", "shortage_cost", "base_price"):
        if getattr(inst, name) <= 0:
            problems.append(f"{name}: must be > 0")
    if not inst.salvage_price < inst.prod_cost:
        problems.append("salvage_price: salvage >= production cost")
    if not inst.prod_cost < inst.shortage_cost:
        problems.append("shortage_cost: shortage cost <= production cost")
    if inst.price_scale <= 0:
        problems.append("price_scale: must be > 0")
    if not 0.0 <= inst.service_level <= 1.0:
        problems.append("service_level: service level out of [0,1]")
    return problems


def min_required_selection(n_customers: int, service_level: float) -> int:
    """Smallest number of served customers satisfying the service-level floor.

    A small slack absorbs float noise in ``n * level`` so that e.g. 50 * 0.8
    never rounds up to 41.
    """
    need = math.ceil(n_customers * service_level - 1e-9)
    return max(0, min(n_customers, need))


def demand_offset(inst: Instance, price: float) -> float:
    """Units of demand each served customer loses at the given selling price."""
    return inst.price_scale * (price - inst.base_price)


def pair_demand(inst: Instance, agent: int, customer: int, price: float) -> float:
    """Units customer would buy from agent at the given price (may be negative)."""
    return inst.effort[agent, customer] * inst.customer_means[customer] - demand_offset(inst, price)


def pair_demand_matrix(inst: Instance, price: float) -> np.ndarray:
    """All agent x customer sold quantities at the given price."""
    return inst.effort * inst.customer_means[None, :] - demand_offset(inst, price)


def compute_demands(inst: Instance, assignment: Assignment, price: float) -> DemandVector:
    """Per-customer units sold under an assignment at a selling price.

    Raises :class:`NegativeDemandError` if the price is so high that an
    assigned customer's quantity would go negative.
    """
    vec = assignment.vector(inst.n_customers)
    served = vec >= 0
    values = np.zeros(inst.n_customers)
    idx = np.flatnonzero(served)
    if idx.size:
        values[idx] = (
            inst.effort[vec[idx], idx] * inst.customer_means[idx]
            - demand_offset(inst, price)
        )
        if np.any(values[idx] < 0.0):
            bad = int(idx[np.argmax(values[idx] < 0.0)])
            raise NegativeDemandError(bad, float(values[bad]))
    return DemandVector(values=values, total=float(np.sum(values)))


def profit_from_totals(
    inst: Instance, demand_total: float, quantity: float, price: float
) -> ProfitBreakdown:
    """Price-linked profit components given total units sold and order quantity."""
    revenue = price * demand_total
    production = inst.prod_cost * quantity
    over = quantity - demand_total
    salvage = inst.salvage_price * over if over > 0.0 else 0.0
    shortage = inst.shortage_cost * (demand_total - quantity) if over < 0.0 else 0.0
    total = revenue - production + salvage - shortage
    return ProfitBreakdown(
        revenue=revenue,
        production_cost=production,
        salvage_credit=salvage,
        shortage_penalty=shortage,
        total=total,
    )


def profit_price_linked(
    inst: Instance, assignment: Assignment, quantity: float, price: float
) -> ProfitBreakdown:
    """Season profit of the price-linked model for (assignment, quantity, price)."""
    if quantity < 0:
        raise ValueError("order quantity must be >= 0")
    demands = compute_demands(inst, assignment, price)
    return profit_from_totals(inst, demands.total, quantity, price)


def profit_all_or_nothing(
    inst: Instance, assignment: Assignment, quantity: float
) -> ProfitBreakdown:
    """Season profit of the all-or-nothing model; shortage is forbidden.

    Sold units are the effort-scaled means of the served customers and must
    not exceed the order quantity.
    """
    if quantity <= 0:
        raise ValueError("all-or-nothing model requires a positive order quantity")
    sold = sold_quantities(inst, assignment)
    total_sold = float(np.sum(sold))
    if total_sold > quantity + VALUE_TOL:
        raise ValueError(
            f"units sold {total_sold:.6g} exceed order quantity {quantity:.6g}"
        )
    revenue = inst.base_price * total_sold
    production = inst.prod_cost * quantity
    salvage = inst.salvage_price * (quantity - total_sold)
    total = revenue - production + salvage
    return ProfitBreakdown(
        revenue=revenue,
        production_cost=production,
        salvage_credit=salvage,
        shortage_penalty=0.0,
        total=total,
    )


def sold_quantities(inst: Instance, assignment: Assignment) -> np.ndarray:
    """Effort-scaled mean demand per customer under an assignment (zero if unserved)."""
    vec = assignment.vector(inst.n_customers)
    served = vec >= 0
    sold = np.zeros(inst.n_customers)
    idx = np.flatnonzero(served)
    if idx.size:
        sold[idx] = inst.effort[vec[idx], idx] * inst.customer_means[idx]
    return sold


def order_cap_global(inst: Instance) -> float:
    """Largest order quantity deliverable within every customer's waiting time.

    Clamped at zero: a customer whose waiting time is below the shipping time
    cannot be served at any quantity, which is an eligibility matter for the
    solvers, not an error here.
    """
    cap = (float(np.min(inst.waiting_times)) - inst.ship_time) / inst.unit_prod_time
    return max(0.0, cap)


def order_cap_for_selection(inst: Instance, assignment: Assignment) -> float:
    """Largest order quantity deliverable within the served customers' waiting times.

    Returns +inf for an empty assignment (no lead-time bound applies).
    """
    if assignment.n_selected == 0:
        return math.inf
    w_min = min(float(inst.waiting_times[j]) for j in assignment.customers)
    return max(0.0, (w_min - inst.ship_time) / inst.unit_prod_time)


def detect_regime(demand_total: float, quantity: float, tol: float = QTY_TOL) -> str:
    gap = quantity - demand_total
    if abs(gap) <= tol:
        return REGIME_BALANCED
    return REGIME_SALVAGE if gap > 0 else REGIME_SHORTAGE


def compute_metrics(
    inst: Instance, assignment: Assignment, quantity: float, demands: DemandVector
) -> Metrics:
    """Fulfilment metrics for a solution; errors if no customer is served."""
    n = assignment.n_selected
    if n == 0:
        raise ValueError("fill ratio undefined: no customer is served")
    idx = np.array(assignment.customers, dtype=np.int64)
    fill = float(np.sum(demands.values[idx] / inst.customer_means[idx])) / n
    coverage = quantity / float(np.sum(inst.customer_means))
    return Metrics(
        mean_fill_ratio=fill,
        order_coverage=coverage,
        served_share=n / inst.n_customers,
    )

"""Exact solver for the all-or-nothing model.

Salvaging is a net loss per unit, so the optimal order quantity equals the
units sold, and the objective collapses to (base price - production cost)
times the total effort-scaled mean of the served customers.  That margin is
constant and positive, so the problem is a max-weight capacitated assignment
on the effort-scaled means; every customer is served whenever aggregate
capacity allows.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import max_weight_capacitated_assignment
from .errors import InfeasibleError
from .model import (
    Assignment,
    Instance,
    ProfitBreakdown,
    profit_all_or_nothing,
    sold_quantities,
)


@dataclass(frozen=True)
class AllOrNothingSolution:
    """Optimal assignment and order quantity for the all-or-nothing model."""

    assignment: Assignment
    quantity: float            # equals total units sold
    breakdown: ProfitBreakdown
    sold: np.ndarray           # per-customer units sold (zero when unserved)

    @property
    def profit(self) -> float:
        return self.breakdown.total


def solve_all_or_nothing(inst: Instance) -> AllOrNothingSolution:
    """Globally optimal all-or-nothing plan.

    Raises :class:`InfeasibleError` when no customer can be served (the model
    requires a positive order quantity).
    """
    weights = inst.effort * inst.customer_means[None, :]
    assignment = max_weight_capacitated_assignment(
        weights, inst.capacities_array, min_cardinality=0
    )
    if assignment.n_selected == 0:
        raise InfeasibleError(
            "no feasible assignment with a positive order quantity "
            "(zero aggregate agent capacity)"
        )
    sold = sold_quantities(inst, assignment)
    quantity = float(np.sum(sold))
    breakdown = profit_all_or_nothing(inst, assignment, quantity)
    return AllOrNothingSolution(
        assignment=assignment,
        quantity=quantity,
        breakdown=breakdown,
        sold=sold,
    )

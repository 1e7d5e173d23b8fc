"""Shared fixtures: two hand-checkable instances and a seeded tiny-instance family.

``slack_pair``: one agent (capacity 2), two customers with long waiting times,
so the lead-time cap (900 units) never binds and the optimum is balanced.

``tight_pair``: same economics but waiting times of 13 and 14 days at one day
per unit, so the cap binds at 10 units and the optimum runs a shortage.
"""
from dataclasses import replace

import pytest

from selective_newsvendor import GenSpec, Instance, generate_instance


def make_slack_pair() -> Instance:
    return Instance(
        agent_capacities=(2,),
        customer_means=[10.0, 20.0],
        waiting_times=[93.0, 103.0],
        effort=[[1.0, 1.0]],
        unit_prod_time=0.1,
        ship_time=3.0,
        prod_cost=70.0,
        salvage_price=50.0,
        shortage_cost=90.0,
        price_scale=1.0,
        base_price=100.0,
        service_level=0.5,
    )


def make_tight_pair() -> Instance:
    return replace(
        make_slack_pair(),
        waiting_times=[13.0, 14.0],
        unit_prod_time=1.0,
        service_level=0.0,
    )


@pytest.fixture
def slack_pair() -> Instance:
    return make_slack_pair()


@pytest.fixture
def tight_pair() -> Instance:
    return make_tight_pair()


def tiny_family(seed: int) -> Instance:
    """Small random instances whose lead-time cap binds at low prices.

    Shapes cycle over 1..3 agents and 2..6 customers; the service level
    cycles over slack, half, and tight.  Waiting times of 20..30 days at one
    day per unit put the cap (17..27 units) inside the demand range, so both
    balanced and shortage optima occur.
    """
    return generate_instance(
        GenSpec(
            size_class="custom",
            seed=seed,
            n_agents=1 + seed % 3,
            n_customers=2 + (seed * 7) % 5,
            capacity_range=(2, 4),
            mean_range=(10.0, 20.0),
            waiting_range=(20.0, 30.0),
            unit_prod_time=1.0,
            service_level=(0.0, 0.5, 0.8)[seed % 3],
        )
    )

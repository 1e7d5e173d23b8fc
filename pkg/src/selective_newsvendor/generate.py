"""Seeded instance generation and instance-file serialization.

Two stock size classes are provided: ``small`` (a handful of agents, tens of
customers, unit production time 0.1 day) and ``large`` (more agents, hundreds
of customers, unit production time 0.02 day).  All drawn fields can be
overridden per spec, which is how the sensitivity sweeps vary one parameter
at a time; scalars are simply replaced, drawn fields get their own substream
so overriding one never perturbs the others.

Instance files are JSON documents with top-level keys ``agents``,
``customers``, ``effort``, ``economics`` and ``meta``; reals are rendered
with full round-trip precision.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import InstanceFormatError, InstanceValidationError
from .model import Instance, validate_instance
from .rng import substream

GENERATOR_VERSION = "1"

#: substream indices per drawn field (fixed; part of the file-format contract)
_STREAM_CAPACITY = 1
_STREAM_MEAN = 2
_STREAM_WAITING = 3
_STREAM_EFFORT = 4

_SIZE_DEFAULTS = {
    "small": {"n_agents": 4, "n_customers": 50, "unit_prod_time": 0.1},
    "large": {"n_agents": 12, "n_customers": 200, "unit_prod_time": 0.02},
    # "custom" uses the small defaults for anything not overridden
    "custom": {"n_agents": 4, "n_customers": 50, "unit_prod_time": 0.1},
}

SMALL_AGENT_COUNTS = (4, 6, 8, 10)
SMALL_CUSTOMER_COUNTS = (50, 60, 70, 80, 90, 100)
LARGE_AGENT_COUNTS = (12, 14, 16, 18)
LARGE_CUSTOMER_COUNTS = (200, 220, 240, 260, 280, 300)

WAITING_RULE_DRAW = "draw"
WAITING_RULE_TWICE_MEAN = "twice_mean"


@dataclass(frozen=True)
class GenSpec:
    """What to generate: size class, seed, and optional per-field overrides."""

    size_class: str = "small"
    seed: int = 0
    n_agents: int | None = None
    n_customers: int | None = None
    capacity_range: tuple[int, int] | None = None      # integer, inclusive
    mean_range: tuple[float, float] | None = None      # real, half-open
    waiting_range: tuple[float, float] | None = None   # real, half-open
    effort_range: tuple[float, float] | None = None    # real, half-open
    waiting_rule: str = WAITING_RULE_DRAW              # draw | twice_mean
    unit_prod_time: float | None = None
    ship_time: float | None = None
    prod_cost: float | None = None
    salvage_price: float | None = None
    shortage_cost: float | None = None
    price_scale: float | None = None
    base_price: float | None = None
    service_level: float | None = None


def _check_range(name: str, rng, integer: bool = False):
    lo, hi = rng
    if hi < lo:
        raise ValueError(f"{name}: empty range [{lo}, {hi}]")
    if integer and (int(lo) != lo or int(hi) != hi):
        raise ValueError(f"{name}: integer range expected, got [{lo}, {hi}]")


def generate_instance(spec: GenSpec) -> Instance:
    """Draw one instance deterministically from (spec, seed)."""
    if spec.size_class not in _SIZE_DEFAULTS:
        raise ValueError(f"unknown size class {spec.size_class!r}")
    if spec.waiting_rule not in (WAITING_RULE_DRAW, WAITING_RULE_TWICE_MEAN):
        raise ValueError(f"unknown waiting rule {spec.waiting_rule!r}")
    defaults = _SIZE_DEFAULTS[spec.size_class]

    n_agents = spec.n_agents if spec.n_agents is not None else defaults["n_agents"]
    n_customers = (
        spec.n_customers if spec.n_customers is not None else defaults["n_customers"]
    )
    if n_agents < 1 or n_customers < 1:
        raise ValueError("need at least one agent and one customer")

    cap_range = spec.capacity_range or (20, 40)
    mean_range = spec.mean_range or (10.0, 20.0)
    wait_range = spec.waiting_range or (90.0, 120.0)
    effort_range = spec.effort_range or (0.8, 1.2)
    _check_range("capacity_range", cap_range, integer=True)
    _check_range("mean_range", mean_range)
    _check_range("waiting_range", wait_range)
    _check_range("effort_range", effort_range)

    def pick(name, fallback):
        value = getattr(spec, name)
        return fallback if value is None else float(value)

    unit_prod_time = pick("unit_prod_time", defaults["unit_prod_time"])
    ship_time = pick("ship_time", 3.0)
    prod_cost = pick("prod_cost", 70.0)
    salvage_price = pick("salvage_price", 50.0)
    shortage_cost = pick("shortage_cost", 90.0)
    price_scale = pick("price_scale", 1.0)
    base_price = pick("base_price", 100.0)
    service_level = pick("service_level", 0.8)

    cap_stream = substream(spec.seed, _STREAM_CAPACITY)
    capacities = tuple(
        cap_stream.uniform_int(int(cap_range[0]), int(cap_range[1]))
        for _ in range(n_agents)
    )
    mean_stream = substream(spec.seed, _STREAM_MEAN)
    means = np.array(
        [mean_stream.uniform(*mean_range) for _ in range(n_customers)]
    )
    if spec.waiting_rule == WAITING_RULE_TWICE_MEAN:
        waits = 2.0 * means
    else:
        wait_stream = substream(spec.seed, _STREAM_WAITING)
        waits = np.array(
            [wait_stream.uniform(*wait_range) for _ in range(n_customers)]
        )
    effort_stream = substream(spec.seed, _STREAM_EFFORT)
    effort = np.array(
        [
            [effort_stream.uniform(*effort_range) for _ in range(n_customers)]
            for _ in range(n_agents)
        ]
    )

    inst = Instance(
        agent_capacities=capacities,
        customer_means=means,
        waiting_times=waits,
        effort=effort,
        unit_prod_time=unit_prod_time,
        ship_time=ship_time,
        prod_cost=prod_cost,
        salvage_price=salvage_price,
        shortage_cost=shortage_cost,
        price_scale=price_scale,
        base_price=base_price,
        service_level=service_level,
        meta={
            "seed": int(spec.seed),
            "size_class": spec.size_class,
            "generator_version": GENERATOR_VERSION,
        },
    )
    problems = validate_instance(inst)
    if problems:
        raise InstanceValidationError(problems)
    return inst


def instance_to_document(inst: Instance) -> dict:
    """Plain-data document for the instance file format."""
    return {
        "agents": [{"capacity": int(g)} for g in inst.agent_capacities],
        "customers": [
            {"mean": float(m), "waiting_time": float(w)}
            for m, w in zip(inst.customer_means, inst.waiting_times)
        ],
        "effort": [[float(p) for p in row] for row in inst.effort],
        "economics": {
            "a": inst.unit_prod_time,
            "b": inst.ship_time,
            "c": inst.prod_cost,
            "e": inst.salvage_price,
            "s": inst.shortage_cost,
            "lambda": inst.price_scale,
            "r": inst.base_price,
            "alpha": inst.service_level,
        },
        "meta": dict(inst.meta),
    }


def save_instance(inst: Instance, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(instance_to_document(inst), handle, indent=2)
        handle.write("\n")


def _require(container, key, path):
    if isinstance(container, dict):
        if key not in container:
            raise InstanceFormatError(f"missing field: {path}")
        return container[key]
    raise InstanceFormatError(f"expected an object at {path.rsplit('.', 1)[0]}")


def _require_real(container, key, path):
    value = _require(container, key, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(f"expected a number at {path}")
    value = float(value)
    if not np.isfinite(value):
        raise InstanceFormatError(f"non-finite number at {path}")
    return value


def instance_from_document(doc: dict) -> Instance:
    agents = _require(doc, "agents", "agents")
    customers = _require(doc, "customers", "customers")
    effort = _require(doc, "effort", "effort")
    economics = _require(doc, "economics", "economics")
    if not isinstance(agents, list) or not agents:
        raise InstanceFormatError("agents: expected a non-empty list")
    if not isinstance(customers, list) or not customers:
        raise InstanceFormatError("customers: expected a non-empty list")

    capacities = []
    for k, entry in enumerate(agents):
        cap = _require_real(entry, "capacity", f"agents[{k}].capacity")
        if cap != int(cap):
            raise InstanceFormatError(f"agents[{k}].capacity: expected an integer")
        capacities.append(int(cap))
    means, waits = [], []
    for k, entry in enumerate(customers):
        means.append(_require_real(entry, "mean", f"customers[{k}].mean"))
        waits.append(_require_real(entry, "waiting_time", f"customers[{k}].waiting_time"))
    if not isinstance(effort, list) or len(effort) != len(agents):
        raise InstanceFormatError("effort: expected one row per agent")
    matrix = []
    for i, row in enumerate(effort):
        if not isinstance(row, list) or len(row) != len(customers):
            raise InstanceFormatError(f"effort[{i}]: expected one entry per customer")
        matrix.append([float(p) for p in row])

    inst = Instance(
        agent_capacities=tuple(capacities),
        customer_means=np.array(means),
        waiting_times=np.array(waits),
        effort=np.array(matrix),
        unit_prod_time=_require_real(economics, "a", "economics.a"),
        ship_time=_require_real(economics, "b", "economics.b"),
        prod_cost=_require_real(economics, "c", "economics.c"),
        salvage_price=_require_real(economics, "e", "economics.e"),
        shortage_cost=_require_real(economics, "s", "economics.s"),
        price_scale=_require_real(economics, "lambda", "economics.lambda"),
        base_price=_require_real(economics, "r", "economics.r"),
        service_level=_require_real(economics, "alpha", "economics.alpha"),
        meta=dict(doc.get("meta", {})),
    )
    problems = validate_instance(inst)
    if problems:
        raise InstanceValidationError(problems)
    return inst


def load_instance(path: str | os.PathLike) -> Instance:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InstanceFormatError(
                f"not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
            ) from exc
    if not isinstance(doc, dict):
        raise InstanceFormatError("top level: expected a JSON object")
    return instance_from_document(doc)

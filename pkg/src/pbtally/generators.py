"""Seeded OPB benchmark generators.

Three instance families with pseudo-Boolean structure that plain clause
benchmarks do not exercise: multi-dimensional knapsacks, combinatorial
auctions with at-most-one item constraints plus a revenue floor, and
sensor-placement coverage with a budget. Every generator is a pure
function of its arguments: the same seed yields byte-identical text, and
the parameters are recorded in header comments so an instance explains
itself.
"""

from __future__ import annotations

import random


def _header(family: str, num_vars: int, num_constraints: int, params: dict) -> list:
    rendered = " ".join("%s=%s" % (k, params[k]) for k in params)
    return [
        "* #variable= %d #constraint= %d" % (num_vars, num_constraints),
        "* generator: %s %s" % (family, rendered),
    ]


def _terms(coeff_lit_pairs) -> str:
    return " ".join("%+d x%d" % (coeff, var) for coeff, var in coeff_lit_pairs)


def gen_knapsack(items: int = 20, dims: int = 2, max_coeff: int = 10,
                 capacity_fraction: float = 0.5, seed: int = 0) -> str:
    """Multi-dimensional knapsack: count the feasible item subsets.

    One variable per item; each dimension d draws item weights uniformly
    from 1..max_coeff and caps their sum at
    ``int(capacity_fraction * total_weight_d)``.
    """
    if items < 1 or dims < 1 or max_coeff < 1:
        raise ValueError("items, dims, and max_coeff must be positive")
    if not 0.0 < capacity_fraction <= 1.0:
        raise ValueError("capacity_fraction must be in (0, 1]")
    rng = random.Random(seed)
    lines = _header("knapsack", items, dims, {
        "seed": seed, "items": items, "dims": dims,
        "max_coeff": max_coeff, "capacity_fraction": capacity_fraction,
    })
    for _ in range(dims):
        weights = [rng.randint(1, max_coeff) for _ in range(items)]
        capacity = int(capacity_fraction * sum(weights))
        lines.append("%s <= %d ;" % (
            _terms((w, i + 1) for i, w in enumerate(weights)), capacity))
    return "\n".join(lines) + "\n"


def gen_auction(bids: int = 12, items: int = 8, max_price: int = 20,
                revenue_fraction: float = 0.3, max_bundle: int = 4,
                seed: int = 0) -> str:
    """Combinatorial auction: count the acceptable allocations.

    One variable per bid. Each bid asks for a random bundle of items at a
    random price. Any item wanted by two or more bids may be sold at most
    once, and the accepted bids must reach a revenue floor of
    ``int(revenue_fraction * total_price)``.
    """
    if bids < 1 or items < 1 or max_price < 1:
        raise ValueError("bids, items, and max_price must be positive")
    if not 1 <= max_bundle <= items:
        raise ValueError("max_bundle must be in 1..items")
    if not 0.0 < revenue_fraction <= 1.0:
        raise ValueError("revenue_fraction must be in (0, 1]")
    rng = random.Random(seed)
    item_ids = list(range(items))
    bundles = []
    prices = []
    wanted_by = [[] for _ in range(items)]
    for b in range(bids):
        bundle = sorted(rng.sample(item_ids, rng.randint(1, max_bundle)))
        bundles.append(bundle)
        prices.append(rng.randint(1, max_price))
        for item in bundle:
            wanted_by[item].append(b + 1)
    amo_items = [item for item in item_ids if len(wanted_by[item]) >= 2]
    revenue_floor = max(1, int(revenue_fraction * sum(prices)))
    lines = _header("auction", bids, len(amo_items) + 1, {
        "seed": seed, "bids": bids, "items": items, "max_price": max_price,
        "revenue_fraction": revenue_fraction, "max_bundle": max_bundle,
    })
    for item in amo_items:
        lines.append("%s <= 1 ;" % _terms((1, b) for b in wanted_by[item]))
    lines.append("%s >= %d ;" % (
        _terms((p, b + 1) for b, p in enumerate(prices)), revenue_floor))
    return "\n".join(lines) + "\n"


def gen_sensor(sensors: int = 10, targets: int = 12, max_cover: int = 4,
               cost_aware: bool = False, max_cost: int = 10,
               budget_fraction: float = 0.5, redundancy_rate: float = 0.25,
               seed: int = 0) -> str:
    """Sensor placement: count the deployments covering every target.

    One variable per sensor. Each target is watchable by a random subset
    of sensors and needs at least one of them switched on; the plain mode
    adds a unit-cost budget capping how many sensors may be on at once.
    Cost-aware mode draws per-sensor costs from 1..max_cost and promotes
    a redundancy_rate share of targets to double coverage.
    """
    if sensors < 1 or targets < 1:
        raise ValueError("sensors and targets must be positive")
    if not 1 <= max_cover <= sensors:
        raise ValueError("max_cover must be in 1..sensors")
    if not 0.0 < budget_fraction <= 1.0:
        raise ValueError("budget_fraction must be in (0, 1]")
    rng = random.Random(seed)
    sensor_ids = list(range(1, sensors + 1))
    lines = _header("sensor", sensors, targets + 1, {
        "seed": seed, "sensors": sensors, "targets": targets,
        "max_cover": max_cover, "cost_aware": cost_aware,
        "max_cost": max_cost, "budget_fraction": budget_fraction,
        "redundancy_rate": redundancy_rate,
    })
    for _ in range(targets):
        need = 1
        low = 1
        if cost_aware and max_cover >= 2 and rng.random() < redundancy_rate:
            need = 2
            low = 2
        watchers = sorted(rng.sample(sensor_ids, rng.randint(low, max_cover)))
        lines.append("%s >= %d ;" % (_terms((1, s) for s in watchers), need))
    if cost_aware:
        costs = [rng.randint(1, max_cost) for _ in range(sensors)]
    else:
        costs = [1] * sensors
    budget = max(2, int(budget_fraction * sum(costs)))
    lines.append("%s <= %d ;" % (
        _terms((c, s + 1) for s, c in enumerate(costs)), budget))
    return "\n".join(lines) + "\n"

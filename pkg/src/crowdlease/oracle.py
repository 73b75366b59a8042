"""Exhaustive reference solver for small instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .cost import Assignment, combined_objective, cost_initial, lease_max, make_assignment
from .model import Scenario, top_k_index

SEARCH_LIMIT = 10**6


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    assignment: Assignment | None
    objective: float

    @property
    def feasible(self) -> bool:
        return self.assignment is not None


def brute_force_oracle(s: Scenario, limit: int = SEARCH_LIMIT) -> OracleResult:
    """Try every placement of every bundle on any of its top-k sites.

    Budget and objective use per-bundle lease costs. Ties keep the first
    placement in enumeration order.
    """
    bundles = s.active_bundles
    choices = [top_k_index(s, b.region) for b in bundles]
    size = math.prod(len(c) for c in choices)
    if size > limit:
        raise InstanceTooLarge(f"{size} placements exceed the search limit {limit}")
    lmax = lease_max(s)
    best = OracleResult(None, math.inf)
    if lmax <= 0:
        return best
    for combo in itertools.product(*choices):
        a = make_assignment(s, {b.region: site for b, site in zip(bundles, combo)})
        if a.bundle_lease + s.bootstrap_cost + a.breakdown.cdn > s.budget:
            continue
        obj = combined_objective(s, a, per_bundle=True)
        if obj < best.objective:
            best = OracleResult(a, obj)
    return best


def oracle_migration_objective(s: Scenario, result: OracleResult) -> float:
    """Oracle objective minus the constant lease term of the no-migration placement."""
    return result.objective - s.p * cost_initial(s) / lease_max(s)

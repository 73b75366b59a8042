"""Lease, CDN and total cost; global relative preference; the combined objective."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping

from .model import CloudSite, Scenario, top_site


class ContractError(ValueError):
    """An assignment does not satisfy the preconditions of a cost function."""


@dataclass(frozen=True)
class CostBreakdown:
    bootstrap: int
    lease: int
    cdn: int

    @property
    def total(self) -> int:
        return self.bootstrap + self.lease + self.cdn


@dataclass(frozen=True)
class Assignment:
    """Which site serves each region's bundle.

    ``breakdown.lease`` packs co-located bundles into shared instances;
    ``bundle_lease`` prices every bundle on its own, which is the figure the
    migration model reasons about.
    """

    served_by: Mapping[str, str]
    breakdown: CostBreakdown
    bundle_lease: int
    conforming: bool = True

    @property
    def lease(self) -> int:
        return self.breakdown.lease

    @property
    def total(self) -> int:
        return self.breakdown.total


def site_lease_cost(site: CloudSite, channel_count: int) -> int:
    if channel_count < 0:
        raise ValueError("channel_count must be >= 0")
    if channel_count == 0:
        return 0
    pr = site.pricing
    instances = -(-channel_count // pr.instance_capacity)
    return instances * pr.instance_rate + channel_count * pr.egress_rate


def cdn_cost(s: Scenario) -> int:
    # Fractional demand can produce sub-cent amounts; round to the cent.
    return int(round(s.cdn_unit_cost * s.total_demand))


def cost_initial(s: Scenario) -> int:
    return sum(
        site_lease_cost(s.site(top_site(s, b.region)), b.stream_count)
        for b in s.active_bundles
    )


def lease_max(s: Scenario) -> int:
    return s.budget - s.bootstrap_cost - cdn_cost(s)


def save_min(s: Scenario) -> int:
    return cost_initial(s) + s.bootstrap_cost + cdn_cost(s) - s.budget


def packed_lease(s: Scenario, served_by: Mapping[str, str]) -> int:
    load: dict[str, int] = defaultdict(int)
    for b in s.active_bundles:
        load[served_by[b.region]] += b.stream_count
    return sum(site_lease_cost(s.site(sid), n) for sid, n in load.items())


def bundle_lease(s: Scenario, served_by: Mapping[str, str]) -> int:
    return sum(
        site_lease_cost(s.site(served_by[b.region]), b.stream_count)
        for b in s.active_bundles
    )


def make_assignment(s: Scenario, served_by: Mapping[str, str], conforming: bool = True) -> Assignment:
    served = {b.region: served_by[b.region] for b in s.active_bundles if b.region in served_by}
    missing = [b.region for b in s.active_bundles if b.region not in served]
    if missing:
        raise ContractError(f"bundles without a serving site: {missing}")
    breakdown = CostBreakdown(s.bootstrap_cost, packed_lease(s, served), cdn_cost(s))
    return Assignment(served, breakdown, bundle_lease(s, served), conforming)


def preference_norm(s: Scenario) -> float:
    """Demand-weighted preference every bundle would get at its top-1 site."""
    return math.fsum(
        b.demand * s.preference(b.region, top_site(s, b.region)) for b in s.active_bundles
    )


def global_relative_preference(s: Scenario, a: Assignment) -> float:
    achieved = []
    for b in s.active_bundles:
        if b.region not in a.served_by:
            raise ContractError(f"bundle {b.region!r} is not assigned")
        achieved.append(b.demand * s.preference(b.region, a.served_by[b.region]))
    norm = preference_norm(s)
    if norm == 0:
        return 1.0
    return math.fsum(achieved) / norm


def combined_objective(s: Scenario, a: Assignment, per_bundle: bool = False) -> float:
    """p * lease / Lease_max + q * (1 - P_global).

    With ``per_bundle`` the lease term uses unpacked per-bundle costs, which
    is what the migration solvers optimise.
    """
    lease = a.bundle_lease if per_bundle else a.lease
    return s.p * lease / lease_max(s) + s.q * (1.0 - global_relative_preference(s, a))

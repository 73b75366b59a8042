"""Domain types: regions, cloud sites, source bundles, preferences, scenarios.

Money is carried as integer cents everywhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping


@dataclass(frozen=True)
class Region:
    id: str
    label: str = ""


@dataclass(frozen=True)
class PricingPolicy:
    """Step pricing over instance capacity plus linear per-channel egress.

    Rates are integer cents per lease unit.
    """

    instance_rate: int
    instance_capacity: int = 1
    egress_rate: int = 0


@dataclass(frozen=True)
class CloudSite:
    id: str
    pricing: PricingPolicy
    label: str = ""


@dataclass(frozen=True)
class SourceBundle:
    """All live streams uploaded from one region during a slice."""

    region: str
    stream_count: int
    demand: float = 0.0

    @property
    def inert(self) -> bool:
        return self.stream_count == 0


@dataclass(frozen=True)
class Scenario:
    regions: tuple[Region, ...]
    sites: tuple[CloudSite, ...]
    bundles: tuple[SourceBundle, ...]
    # region id -> site id -> preference in (0, 1]
    preferences: Mapping[str, Mapping[str, float]]
    k: int
    bootstrap_cost: int
    cdn_unit_cost: int
    budget: int
    p: float = 1.0
    q: float = 1.0
    _site_index: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "sites", tuple(self.sites))
        object.__setattr__(self, "bundles", tuple(self.bundles))
        object.__setattr__(self, "_site_index", {s.id: s for s in self.sites})

    def site(self, site_id: str) -> CloudSite:
        return self._site_index[site_id]

    def bundle(self, region_id: str) -> SourceBundle:
        for b in self.bundles:
            if b.region == region_id:
                return b
        raise KeyError(region_id)

    def preference(self, region_id: str, site_id: str) -> float:
        return self.preferences[region_id][site_id]

    @property
    def site_ids(self) -> list[str]:
        return [s.id for s in self.sites]

    @property
    def active_bundles(self) -> list[SourceBundle]:
        return [b for b in self.bundles if not b.inert]

    @property
    def total_demand(self) -> float:
        return math.fsum(b.demand for b in self.bundles)

    def with_bundles(self, bundles, budget: int | None = None) -> "Scenario":
        """Copy of this scenario carrying another slice's bundles.

        Regions missing from ``bundles`` get an inert bundle.
        """
        by_region = {b.region: b for b in bundles}
        filled = tuple(by_region.get(r.id, SourceBundle(r.id, 0, 0.0)) for r in self.regions)
        return replace(self, bundles=filled, budget=self.budget if budget is None else budget)


def validate_scenario(s: Scenario) -> list[str]:
    """Return every broken invariant as a message; empty when the scenario is sound."""
    problems: list[str] = []

    region_ids = [r.id for r in s.regions]
    site_ids = [x.id for x in s.sites]
    for kind, ids in (("region", region_ids), ("site", site_ids)):
        seen = set()
        for i in ids:
            if i in seen:
                problems.append(f"{kind} {i!r}: duplicate id")
            seen.add(i)

    for site in s.sites:
        pr = site.pricing
        if pr.instance_rate < 0:
            problems.append(f"site {site.id!r}: instance_rate must be >= 0")
        if pr.egress_rate < 0:
            problems.append(f"site {site.id!r}: egress_rate must be >= 0")
        if not isinstance(pr.instance_capacity, int) or pr.instance_capacity < 1:
            problems.append(f"site {site.id!r}: instance_capacity must be an integer >= 1")

    counts: dict[str, int] = {}
    for b in s.bundles:
        counts[b.region] = counts.get(b.region, 0) + 1
        if b.region not in region_ids:
            problems.append(f"bundle {b.region!r}: unknown region")
        if not isinstance(b.stream_count, int) or b.stream_count < 0:
            problems.append(f"bundle {b.region!r}: stream_count must be an integer >= 0")
        if not b.demand >= 0:
            problems.append(f"bundle {b.region!r}: demand must be >= 0")
    for r in region_ids:
        n = counts.get(r, 0)
        if n != 1:
            problems.append(f"region {r!r}: expected exactly one bundle, found {n}")

    for r in region_ids:
        row = s.preferences.get(r, {})
        for site in site_ids:
            if site not in row:
                problems.append(f"preference ({r!r}, {site!r}): missing entry")
                continue
            v = row[site]
            if not (0 < v <= 1):
                problems.append(f"preference ({r!r}, {site!r}): value {v} outside range (0, 1]")
    for r, row in s.preferences.items():
        if r not in region_ids:
            problems.append(f"preference row {r!r}: unknown region")
        for site in row:
            if site not in site_ids:
                problems.append(f"preference ({r!r}, {site!r}): unknown site")

    if not isinstance(s.k, int) or s.k < 1:
        problems.append(f"params: k must be an integer >= 1, got {s.k}")
    elif s.k > len(site_ids):
        problems.append(f"params: k = {s.k} exceeds site count m = {len(site_ids)} (k <= m)")
    if s.p < 0 or s.q < 0:
        problems.append("params: weights p and q must be >= 0")
    if not s.p + s.q > 0:
        problems.append("params: p + q must be > 0")
    if s.bootstrap_cost < 0:
        problems.append("params: c0 must be >= 0")
    if s.cdn_unit_cost < 0:
        problems.append("params: cdn_unit_cost must be >= 0")
    from .cost import cdn_cost

    floor = s.bootstrap_cost + cdn_cost(s)
    if s.budget <= floor:
        problems.append(
            f"params: budget {s.budget} must exceed c0 + CDN cost = {floor} (cents)"
        )
    return problems


def top_k_index(s: Scenario, region: str, k: int | None = None) -> list[str]:
    """Sites ranked by preference for ``region``, best first, cut at ``k``.

    Ties go to the smaller site id.
    """
    if region not in s.preferences:
        raise KeyError(f"unknown region {region!r}")
    k = s.k if k is None else k
    row = s.preferences[region]
    ranked = sorted(s.site_ids, key=lambda sid: (-row[sid], sid))
    return ranked[: min(k, len(ranked))]


def top_site(s: Scenario, region: str) -> str:
    return top_k_index(s, region, 1)[0]

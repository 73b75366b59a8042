"""Comparison strategies: top-preferred-first, centralized provisioning and the
centralized dedicated server used as the cost benchmark."""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from .cost import Assignment, make_assignment
from .model import Scenario, top_k_index, top_site


def assign_top_preferred(s: Scenario) -> Assignment:
    return make_assignment(s, {b.region: top_site(s, b.region) for b in s.active_bundles})


def assign_centralized(s: Scenario, centers: Sequence[str]) -> Assignment:
    """Each bundle goes to the center it likes best.

    The result may leave a bundle outside its top-k sites; ``conforming``
    records whether it did.
    """
    if not centers:
        raise ValueError("centralized provisioning needs at least one center")
    for c in centers:
        s.site(c)
    served = {}
    for b in s.active_bundles:
        served[b.region] = min(centers, key=lambda c: (-s.preference(b.region, c), c))
    conforming = all(served[r] in top_k_index(s, r) for r in served)
    return make_assignment(s, served, conforming)


def sourcer_counts(scenarios: Sequence[Scenario]) -> Counter:
    """Streams whose top-1 site is each site, summed over ``scenarios``."""
    counts: Counter = Counter()
    for s in scenarios:
        for sid in s.site_ids:
            counts[sid] += 0
        for b in s.active_bundles:
            counts[top_site(s, b.region)] += b.stream_count
    return counts


def default_centers(scenarios: Sequence[Scenario], n: int = 2) -> list[str]:
    counts = sourcer_counts(scenarios)
    return sorted(counts, key=lambda sid: (-counts[sid], sid))[:n]


def assign_single_center(s: Scenario, center: str) -> Assignment:
    served = {b.region: center for b in s.active_bundles}
    conforming = all(center in top_k_index(s, r) for r in served)
    return make_assignment(s, served, conforming)


def cds_benchmark_cost(trace: Sequence[Scenario], center: str | None = None) -> int:
    """Total cost of one dedicated site sized for the busiest slice.

    ``center`` defaults to the site hosting the most sourcers over the trace.
    """
    if not trace:
        raise ValueError("empty trace")
    if center is None:
        center = default_centers(trace, 1)[0]
    return max(assign_single_center(s, center).total for s in trace)

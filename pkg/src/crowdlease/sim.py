"""Time-sliced trace replay, synthetic diurnal traces and report metrics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .baselines import (
    assign_centralized,
    assign_single_center,
    assign_top_preferred,
    default_centers,
)
from .cost import Assignment, global_relative_preference, make_assignment
from .graph import build_migration_graph
from .model import Scenario, SourceBundle
from .solver import (
    CANDIDATE_LIMIT,
    DP_CELL_LIMIT,
    max_saving_solution,
    online_service_migration,
    optimal_service_migration,
    served_by_after,
)

log = logging.getLogger(__name__)

STRATEGIES = ("TOP", "CP", "OM", "OM-online", "CDS")
DEFAULT_LATENCY_SCALE = 100.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class TraceSlice:
    slice_index: int
    bundles: tuple[SourceBundle, ...]

    @property
    def total_demand(self) -> float:
        return math.fsum(b.demand for b in self.bundles)


@dataclass(frozen=True)
class StrategyRecord:
    strategy: str
    lease_cost: int
    total_cost: int
    bundle_lease: int
    p_global: float
    latency_ms: float
    feasible: bool
    conforming: bool
    served_by: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class SliceReport:
    slice_index: int
    budget: int
    total_demand: float
    records: dict[str, StrategyRecord]


@dataclass(frozen=True)
class SummaryRow:
    strategy: str
    mean_cost_ratio: float
    peak_cost_ratio: float
    mean_p_global: float
    mean_latency_reduction: float
    infeasible_slices: int


def latency_proxy(
    s: Scenario,
    a: Assignment,
    latency_table: Mapping[tuple[str, str], float] | None = None,
    scale: float | None = DEFAULT_LATENCY_SCALE,
) -> float:
    """Demand-weighted mean latency of the assignment, in milliseconds.

    Pairs missing from ``latency_table`` fall back to ``scale / preference``.
    """
    num = []
    den = []
    for b in s.active_bundles:
        site = a.served_by[b.region]
        if latency_table is not None and (b.region, site) in latency_table:
            lat = latency_table[(b.region, site)]
        elif scale is not None:
            lat = scale / s.preference(b.region, site)
        else:
            raise ConfigError(f"no latency for ({b.region}, {site}) and no inversion scale")
        num.append(b.demand * lat)
        den.append(b.demand)
    total = math.fsum(den)
    if total == 0:
        log.warning("zero total demand; latency proxy reported as 0")
        return 0.0
    return math.fsum(num) / total


def _record(name, s, a, feasible, latency_table, scale, lease=None) -> StrategyRecord:
    lease = a.lease if lease is None else lease
    return StrategyRecord(
        strategy=name,
        lease_cost=lease,
        total_cost=s.bootstrap_cost + lease + a.breakdown.cdn,
        bundle_lease=a.bundle_lease,
        p_global=global_relative_preference(s, a),
        latency_ms=latency_proxy(s, a, latency_table, scale),
        feasible=feasible,
        conforming=a.conforming,
        served_by=dict(a.served_by),
    )


def solve_slice(
    s: Scenario,
    strategies: Sequence[str],
    *,
    slice_index: int = 0,
    centers: Sequence[str] | None = None,
    cds_center: str | None = None,
    cds_lease: int | None = None,
    latency_table=None,
    latency_scale: float | None = DEFAULT_LATENCY_SCALE,
    candidate_limit: int = CANDIDATE_LIMIT,
    cell_limit: int = DP_CELL_LIMIT,
) -> SliceReport:
    records = {}
    graph = None
    for name in strategies:
        if name == "TOP":
            a = assign_top_preferred(s)
            records[name] = _record(name, s, a, a.total <= s.budget, latency_table, latency_scale)
        elif name == "CP":
            a = assign_centralized(s, centers or default_centers([s]))
            records[name] = _record(name, s, a, a.total <= s.budget, latency_table, latency_scale)
        elif name in ("OM", "OM-online"):
            if graph is None:
                graph = build_migration_graph(s)
            if name == "OM":
                sol = optimal_service_migration(s, graph, candidate_limit, cell_limit)
            else:
                sol = online_service_migration(s, graph, candidate_limit)
            chosen = sol.chosen if sol.feasible else max_saving_solution(graph)
            a = make_assignment(s, served_by_after(s, chosen))
            records[name] = _record(name, s, a, sol.feasible, latency_table, latency_scale)
        elif name == "CDS":
            center = cds_center or default_centers([s], 1)[0]
            a = assign_single_center(s, center)
            lease = a.lease if cds_lease is None else cds_lease
            rec = _record(name, s, a, True, latency_table, latency_scale, lease=lease)
            records[name] = rec
        else:
            raise ConfigError(f"unknown strategy {name!r}; choose from {', '.join(STRATEGIES)}")
    return SliceReport(slice_index, s.budget, s.total_demand, records)


def run_trace(
    base: Scenario,
    trace: Sequence[TraceSlice],
    strategies: Sequence[str] = ("TOP", "OM"),
    *,
    budget_from_cds: bool = False,
    centers: Sequence[str] | None = None,
    cds_center: str | None = None,
    latency_table=None,
    latency_scale: float | None = DEFAULT_LATENCY_SCALE,
    candidate_limit: int = CANDIDATE_LIMIT,
    cell_limit: int = DP_CELL_LIMIT,
) -> list[SliceReport]:
    """Solve every slice of ``trace`` with each strategy.

    With ``budget_from_cds`` every slice's budget is the cost of a single
    dedicated site sized for the busiest slice. The CDS strategy always
    reports that peak-sized lease.
    """
    if not trace:
        return []
    for a, b in zip(trace, trace[1:]):
        if b.slice_index <= a.slice_index:
            raise ConfigError(f"slice indices must increase: {a.slice_index} then {b.slice_index}")
    scenarios = [base.with_bundles(sl.bundles) for sl in trace]
    if cds_center is None:
        cds_center = default_centers(scenarios, 1)[0]
    if centers is None:
        centers = default_centers(scenarios)
    dedicated = [assign_single_center(s, cds_center) for s in scenarios]
    cds_lease = max(a.lease for a in dedicated)
    if budget_from_cds:
        budget = max(a.total for a in dedicated)
        scenarios = [s.with_bundles(s.bundles, budget=budget) for s in scenarios]

    return [
        solve_slice(
            s,
            strategies,
            slice_index=sl.slice_index,
            centers=centers,
            cds_center=cds_center,
            cds_lease=cds_lease,
            latency_table=latency_table,
            latency_scale=latency_scale,
            candidate_limit=candidate_limit,
            cell_limit=cell_limit,
        )
        for s, sl in zip(scenarios, trace)
    ]


def _peak_slice(reports: Sequence[SliceReport]) -> SliceReport:
    return max(reports, key=lambda r: r.total_demand)  # first wins on ties


def summarize(reports: Sequence[SliceReport], benchmark: str) -> list[SummaryRow]:
    """Per-strategy cost ratios, preference and latency gains against ``benchmark``.

    Ratios compare lease costs. The peak ratio is taken at the slice with the
    highest total demand. Slices where the benchmark leases nothing are left
    out of ratio means.
    """
    if not reports:
        return []
    for r in reports:
        if benchmark not in r.records:
            raise ConfigError(f"benchmark {benchmark!r} missing from slice {r.slice_index}")
    names = list(reports[0].records)
    peak = _peak_slice(reports)
    rows = []
    for name in names:
        ratios, lat_gain, pg = [], [], []
        infeasible = 0
        for r in reports:
            rec, bench = r.records[name], r.records[benchmark]
            pg.append(rec.p_global)
            infeasible += not rec.feasible
            if bench.lease_cost > 0:
                ratios.append(rec.lease_cost / bench.lease_cost)
            if bench.latency_ms > 0:
                lat_gain.append((bench.latency_ms - rec.latency_ms) / bench.latency_ms)
        pb = peak.records[benchmark].lease_cost
        rows.append(SummaryRow(
            strategy=name,
            mean_cost_ratio=math.fsum(ratios) / len(ratios) if ratios else math.nan,
            peak_cost_ratio=peak.records[name].lease_cost / pb if pb > 0 else math.nan,
            mean_p_global=math.fsum(pg) / len(pg),
            mean_latency_reduction=math.fsum(lat_gain) / len(lat_gain) if lat_gain else math.nan,
            infeasible_slices=infeasible,
        ))
    return rows


@dataclass(frozen=True)
class RegionWave:
    """Daily stream/demand profile of one region; ``peak_hour`` is local to the trace clock."""

    region: str
    peak_hour: float
    trough_streams: float
    peak_streams: float
    trough_demand: float = 0.0
    peak_demand: float = 0.0


@dataclass(frozen=True)
class TraceSpec:
    regions: tuple[RegionWave, ...]
    slices_per_day: int = 24
    days: int = 1
    noise: float = 0.0


def generate_diurnal_trace(spec: TraceSpec, seed: int) -> list[TraceSlice]:
    """Cosine day/night cycles between trough and peak, one phase per region.

    ``noise`` scales each value by a uniform factor in [1 - noise, 1 + noise].
    """
    if spec.slices_per_day < 1 or spec.days < 1:
        raise ValueError("slices_per_day and days must be >= 1")
    if not 0 <= spec.noise < 1:
        raise ValueError("noise must be in [0, 1)")
    for w in spec.regions:
        if w.trough_streams > w.peak_streams or w.trough_demand > w.peak_demand:
            raise ValueError(f"region {w.region!r}: trough exceeds peak")
        if w.trough_streams < 0 or w.trough_demand < 0:
            raise ValueError(f"region {w.region!r}: negative trough")

    rng = np.random.default_rng(seed)
    n = spec.slices_per_day * spec.days
    hours = 24.0 * (np.arange(n) % spec.slices_per_day) / spec.slices_per_day
    trace = []
    columns = []
    for w in spec.regions:
        level = 0.5 * (1.0 + np.cos(2 * np.pi * (hours - w.peak_hour) / 24.0))
        streams = w.trough_streams + (w.peak_streams - w.trough_streams) * level
        demand = w.trough_demand + (w.peak_demand - w.trough_demand) * level
        if spec.noise > 0:
            streams = streams * rng.uniform(1 - spec.noise, 1 + spec.noise, n)
            demand = demand * rng.uniform(1 - spec.noise, 1 + spec.noise, n)
        columns.append((w.region, np.rint(streams).astype(int), np.round(demand, 2)))
    for t in range(n):
        trace.append(TraceSlice(t, tuple(
            SourceBundle(region, int(st[t]), float(dm[t])) for region, st, dm in columns
        )))
    return trace

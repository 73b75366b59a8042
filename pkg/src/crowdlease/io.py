"""Scenario JSON documents, trace CSV files and report CSV files."""

from __future__ import annotations

import csv
import json
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import IO, Iterable

from .model import CloudSite, PricingPolicy, Region, Scenario, SourceBundle, validate_scenario
from .sim import RegionWave, SliceReport, SummaryRow, TraceSlice, TraceSpec

TRACE_HEADER = ["slice_index", "region", "stream_count", "demand"]
REPORT_HEADER = [
    "slice_index", "strategy", "lease_cost", "total_cost", "p_global", "latency_proxy_ms", "feasible",
]
SUMMARY_HEADER = [
    "strategy", "mean_cost_ratio", "peak_cost_ratio", "mean_p_global",
    "mean_latency_reduction", "infeasible_slices",
]
ASSIGNMENT_HEADER = ["slice_index", "strategy", "region", "site"]


class FormatError(ValueError):
    """A file could not be parsed."""


class ScenarioError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("invalid scenario:\n  " + "\n  ".join(violations))


def parse_money(value, where: str) -> int:
    """Decimal amount (string or number) to integer cents."""
    if isinstance(value, bool):
        raise FormatError(f"{where}: expected a money amount, got {value!r}")
    try:
        d = Decimal(str(value))
    except InvalidOperation:
        raise FormatError(f"{where}: not a decimal amount: {value!r}") from None
    if not d.is_finite():
        raise FormatError(f"{where}: not a finite amount: {value!r}")
    if d.as_tuple().exponent < -2:
        raise FormatError(f"{where}: more than 2 fractional digits in {value!r}")
    return int(d * 100)


def format_money(cents: int) -> str:
    sign = "-" if cents < 0 else ""
    whole, frac = divmod(abs(cents), 100)
    return f"{sign}{whole}.{frac:02d}"


def format_real(x: float) -> str:
    return f"{x:.5f}"


def _get(doc: dict, key: str, where: str):
    if not isinstance(doc, dict) or key not in doc:
        raise FormatError(f"{where}: missing key {key!r}")
    return doc[key]


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise FormatError(f"{where}: expected an integer, got {value!r}")
    return value


def _real(value, where: str) -> float:
    if isinstance(value, bool):
        raise FormatError(f"{where}: expected a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise FormatError(f"{where}: expected a number, got {value!r}") from None


def scenario_from_dict(doc: dict) -> Scenario:
    sites = []
    for i, raw in enumerate(_get(doc, "sites", "document")):
        at = f"sites[{i}]"
        sites.append(CloudSite(
            id=str(_get(raw, "id", at)),
            label=raw.get("label", ""),
            pricing=PricingPolicy(
                instance_rate=parse_money(_get(raw, "instance_rate", at), f"{at}.instance_rate"),
                instance_capacity=_int(raw.get("instance_capacity", 1), f"{at}.instance_capacity"),
                egress_rate=parse_money(raw.get("egress_rate", "0"), f"{at}.egress_rate"),
            ),
        ))
    regions = [
        Region(str(_get(raw, "id", f"regions[{i}]")), raw.get("label", ""))
        for i, raw in enumerate(_get(doc, "regions", "document"))
    ]
    bundles = []
    for i, raw in enumerate(_get(doc, "bundles", "document")):
        at = f"bundles[{i}]"
        bundles.append(SourceBundle(
            region=str(_get(raw, "region", at)),
            stream_count=_int(_get(raw, "stream_count", at), f"{at}.stream_count"),
            demand=_real(raw.get("demand", 0), f"{at}.demand"),
        ))
    prefs_raw = _get(doc, "preferences", "document")
    if not isinstance(prefs_raw, dict):
        raise FormatError("preferences: expected an object keyed by region id")
    prefs = {
        str(r): {str(sid): _real(v, f"preferences.{r}.{sid}") for sid, v in row.items()}
        for r, row in prefs_raw.items()
    }
    params = _get(doc, "params", "document")
    return Scenario(
        regions=tuple(regions),
        sites=tuple(sites),
        bundles=tuple(bundles),
        preferences=prefs,
        k=_int(_get(params, "k", "params"), "params.k"),
        bootstrap_cost=parse_money(params.get("c0", "0"), "params.c0"),
        cdn_unit_cost=parse_money(params.get("cdn_unit_cost", "0"), "params.cdn_unit_cost"),
        budget=parse_money(_get(params, "budget", "params"), "params.budget"),
        p=_real(params.get("p", 1), "params.p"),
        q=_real(params.get("q", 1), "params.q"),
    )


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "sites": [
            {
                "id": x.id,
                "label": x.label,
                "instance_rate": format_money(x.pricing.instance_rate),
                "instance_capacity": x.pricing.instance_capacity,
                "egress_rate": format_money(x.pricing.egress_rate),
            }
            for x in s.sites
        ],
        "regions": [{"id": r.id, "label": r.label} for r in s.regions],
        "bundles": [
            {"region": b.region, "stream_count": b.stream_count, "demand": b.demand}
            for b in s.bundles
        ],
        "preferences": {r: dict(row) for r, row in s.preferences.items()},
        "params": {
            "k": s.k,
            "c0": format_money(s.bootstrap_cost),
            "cdn_unit_cost": format_money(s.cdn_unit_cost),
            "budget": format_money(s.budget),
            "p": s.p,
            "q": s.q,
        },
    }


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    s = scenario_from_dict(doc)
    problems = validate_scenario(s)
    if problems:
        raise ScenarioError(problems)
    return s


def write_scenario(s: Scenario, path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2) + "\n")


def read_trace(fh: IO[str], regions: Iterable[str] | None = None) -> list[TraceSlice]:
    known = set(regions) if regions is not None else None
    reader = csv.reader(fh)
    header = next(reader, None)
    if header is None:
        return []
    if [h.strip() for h in header] != TRACE_HEADER:
        raise FormatError(f"row 1: expected header {','.join(TRACE_HEADER)}")
    slices: list[TraceSlice] = []
    current: list[SourceBundle] = []
    index = None
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise FormatError(f"row {rowno}: expected 4 columns, got {len(row)}")
        try:
            sl = int(row[0])
            streams = int(row[2])
            demand = float(row[3])
        except ValueError as e:
            raise FormatError(f"row {rowno}: {e}") from None
        region = row[1].strip()
        if known is not None and region not in known:
            raise FormatError(f"row {rowno}: unknown region {region!r}")
        if streams < 0 or demand < 0:
            raise FormatError(f"row {rowno}: stream_count and demand must be >= 0")
        if index is None or sl != index:
            if index is not None and sl < index:
                raise FormatError(f"row {rowno}: slice_index {sl} decreases (previous {index})")
            if index is not None:
                slices.append(TraceSlice(index, tuple(current)))
            index, current = sl, []
        if any(b.region == region for b in current):
            raise FormatError(f"row {rowno}: region {region!r} repeated within slice {sl}")
        current.append(SourceBundle(region, streams, demand))
    if index is not None:
        slices.append(TraceSlice(index, tuple(current)))
    return slices


def load_trace(path, regions: Iterable[str] | None = None) -> list[TraceSlice]:
    with open(path, newline="") as fh:
        return read_trace(fh, regions)


def write_trace(trace: Iterable[TraceSlice], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for sl in trace:
        for b in sl.bundles:
            w.writerow([sl.slice_index, b.region, b.stream_count, f"{b.demand:.2f}"])


def load_trace_spec(path) -> TraceSpec:
    doc = json.loads(Path(path).read_text())
    waves = [
        RegionWave(
            region=str(_get(r, "region", f"regions[{i}]")),
            peak_hour=_real(r.get("peak_hour", 0), f"regions[{i}].peak_hour"),
            trough_streams=_real(_get(r, "trough_streams", f"regions[{i}]"), f"regions[{i}].trough_streams"),
            peak_streams=_real(_get(r, "peak_streams", f"regions[{i}]"), f"regions[{i}].peak_streams"),
            trough_demand=_real(r.get("trough_demand", 0), f"regions[{i}].trough_demand"),
            peak_demand=_real(r.get("peak_demand", 0), f"regions[{i}].peak_demand"),
        )
        for i, r in enumerate(_get(doc, "regions", "document"))
    ]
    return TraceSpec(
        regions=tuple(waves),
        slices_per_day=_int(doc.get("slices_per_day", 24), "slices_per_day"),
        days=_int(doc.get("days", 1), "days"),
        noise=_real(doc.get("noise", 0.0), "noise"),
    )


def write_report(reports: Iterable[SliceReport], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for rep in reports:
        for rec in rep.records.values():
            w.writerow([
                rep.slice_index,
                rec.strategy,
                format_money(rec.lease_cost),
                format_money(rec.total_cost),
                format_real(rec.p_global),
                format_real(rec.latency_ms),
                "true" if rec.feasible else "false",
            ])


def write_summary(rows: Iterable[SummaryRow], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in rows:
        w.writerow([
            r.strategy,
            format_real(r.mean_cost_ratio),
            format_real(r.peak_cost_ratio),
            format_real(r.mean_p_global),
            format_real(r.mean_latency_reduction),
            r.infeasible_slices,
        ])


def write_assignments(reports: Iterable[SliceReport], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(ASSIGNMENT_HEADER)
    for rep in reports:
        for rec in rep.records.values():
            for region in sorted(rec.served_by):
                w.writerow([rep.slice_index, rec.strategy, region, rec.served_by[region]])

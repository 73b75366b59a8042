"""Command-line entry point: ``crowdlease validate|solve|simulate|gentrace``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .graph import build_migration_graph, dump_graph
from .io import (
    FormatError,
    ScenarioError,
    load_scenario,
    load_trace,
    load_trace_spec,
    scenario_from_dict,
    write_assignments,
    write_report,
    write_summary,
    write_trace,
)
from .model import validate_scenario
from .sim import (
    DEFAULT_LATENCY_SCALE,
    STRATEGIES,
    ConfigError,
    TraceSlice,
    generate_diurnal_trace,
    run_trace,
    summarize,
)
from .solver import CANDIDATE_LIMIT, DP_CELL_LIMIT, SolverLimitError

log = logging.getLogger("crowdlease")


@dataclass
class RunConfig:
    scenario: Path
    trace: Path | None = None
    strategies: list[str] = field(default_factory=lambda: ["TOP", "OM"])
    centers: list[str] | None = None
    benchmark: str = "TOP"
    out_dir: Path = Path("out")
    seed: int = 0
    latency_scale: float = DEFAULT_LATENCY_SCALE
    candidate_limit: int = CANDIDATE_LIMIT
    cell_limit: int = DP_CELL_LIMIT
    budget_from_cds: bool = False
    dump_graph: bool = False

    def check(self):
        unknown = [x for x in self.strategies if x not in STRATEGIES]
        if unknown:
            raise ConfigError(f"unknown strategies {unknown}; choose from {', '.join(STRATEGIES)}")
        if self.centers is not None and not self.centers and "CP" in self.strategies:
            raise ConfigError("CP needs at least one center")
        if self.benchmark not in self.strategies:
            raise ConfigError(f"benchmark {self.benchmark} is not among the strategies run")


def _load_trace_arg(path: Path, regions, seed: int) -> list[TraceSlice]:
    # A JSON trace argument is a generator spec, replayed with --seed.
    if path.suffix == ".json":
        return generate_diurnal_trace(load_trace_spec(path), seed)
    return load_trace(path, regions)


def run(config: RunConfig) -> int:
    config.check()
    base = load_scenario(config.scenario)
    if config.trace is None:
        trace = [TraceSlice(0, base.bundles)]
    else:
        trace = _load_trace_arg(config.trace, [r.id for r in base.regions], config.seed)

    reports = run_trace(
        base,
        trace,
        config.strategies,
        budget_from_cds=config.budget_from_cds,
        centers=config.centers,
        latency_scale=config.latency_scale,
        candidate_limit=config.candidate_limit,
        cell_limit=config.cell_limit,
    )
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.csv", "w", newline="") as fh:
        write_report(reports, fh)
    with open(out / "summary.csv", "w", newline="") as fh:
        write_summary(summarize(reports, config.benchmark), fh)
    with open(out / "assignments.csv", "w", newline="") as fh:
        write_assignments(reports, fh)
    if config.dump_graph:
        (out / "graph.txt").write_text(dump_graph(build_migration_graph(base)))

    infeasible = sum(not rec.feasible for r in reports for name, rec in r.records.items() if name.startswith("OM"))
    log.info("%d slice(s) solved, %d infeasible OM result(s); reports in %s", len(reports), infeasible, out)
    return 0


def _strategy_list(values: list[str] | None, default: list[str]) -> list[str]:
    if not values:
        return list(default)
    return [x.strip() for v in values for x in v.split(",") if x.strip()]


def _cmd_validate(args) -> int:
    try:
        doc = json.loads(Path(args.scenario).read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"{args.scenario}:{e.lineno}:{e.colno}: {e.msg}") from None
    problems = validate_scenario(scenario_from_dict(doc))
    for p in problems:
        print(p)
    if not problems:
        print("ok")
    return 1 if problems else 0


def _common_run_args(args, strategies, benchmark, trace=None, budget_from_cds=False) -> RunConfig:
    return RunConfig(
        scenario=Path(args.scenario),
        trace=trace,
        strategies=strategies,
        centers=args.centers,
        benchmark=benchmark,
        out_dir=Path(args.out),
        seed=getattr(args, "seed", 0),
        latency_scale=args.latency_scale,
        candidate_limit=args.max_candidates,
        cell_limit=args.max_dp_cells,
        budget_from_cds=budget_from_cds,
        dump_graph=getattr(args, "dump_graph", False),
    )


def _cmd_solve(args) -> int:
    strategies = _strategy_list(args.strategies, ["TOP", "OM"])
    benchmark = "TOP" if "TOP" in strategies else strategies[0]
    return run(_common_run_args(args, strategies, benchmark))


def _cmd_simulate(args) -> int:
    strategies = _strategy_list(args.strategies, list(STRATEGIES))
    benchmark = args.benchmark.upper()
    if benchmark not in strategies:
        strategies.append(benchmark)
    config = _common_run_args(
        args, strategies, benchmark, trace=Path(args.trace), budget_from_cds=benchmark == "CDS"
    )
    return run(config)


def _cmd_gentrace(args) -> int:
    trace = generate_diurnal_trace(load_trace_spec(args.genspec), args.seed)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            write_trace(trace, fh)
    else:
        write_trace(trace, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdlease",
        description="Cost-aware cloud site leasing for crowdsourced live streams.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario document")
    p.add_argument("scenario")
    p.set_defaults(func=_cmd_validate)

    def run_options(p):
        p.add_argument("--strategies", nargs="+", metavar="NAME",
                       help=f"any of {', '.join(STRATEGIES)} (space or comma separated)")
        p.add_argument("--centers", nargs="+", metavar="SITE", help="CP center sites")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--latency-scale", type=float, default=DEFAULT_LATENCY_SCALE,
                       help="latency = scale / preference, in ms (default: 100)")
        p.add_argument("--max-candidates", type=int, default=CANDIDATE_LIMIT)
        p.add_argument("--max-dp-cells", type=int, default=DP_CELL_LIMIT)

    p = sub.add_parser("solve", help="solve the scenario's own slice")
    p.add_argument("scenario")
    run_options(p)
    p.add_argument("--dump-graph", action="store_true", help="also write graph.txt")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("simulate", help="replay a trace CSV (or a generator spec .json)")
    p.add_argument("scenario")
    p.add_argument("trace")
    p.add_argument("--benchmark", choices=["cds", "top", "CDS", "TOP"], default="cds")
    p.add_argument("--seed", type=int, default=0, help="seed when the trace is a generator spec")
    run_options(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("gentrace", help="generate a synthetic diurnal trace CSV")
    p.add_argument("genspec")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output", help="write here instead of stdout")
    p.set_defaults(func=_cmd_gentrace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"crowdlease: usage error: {e}", file=sys.stderr)
        return 2
    except (ScenarioError, FormatError, SolverLimitError) as e:
        print(f"crowdlease: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"crowdlease: I/O error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    python -m rtsim run --config scenarios/testapp.cfg --protocol dpcp --horizon 20ms --out out/
    python -m rtsim sweep --config scenarios/testapp.cfg --overheads scenarios/overheads/zero.cfg
    python -m rtsim verify --config small.cfg --horizon 1us
    python -m rtsim testapp --protocol dflp --out testapp-dflp.cfg
    python -m rtsim generate --seed 7 --processors 4 --tasks 8 --resources 2 --utilization 1.5 --out random.cfg

Every subcommand is a thin wrapper over library calls. Exit codes: 0 ok,
1 oracle mismatch or failed sweep cells, 2 invalid configuration or usage,
3 internal invariant breach, 4 instance too large for the oracle."""
import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from .engine import check_guard, compare_traces, run_scenario, step_oracle
from .errors import ConfigError, ExportError, OracleGuardError, SimulationFault
from .metrics import export_csv, export_populations_csv, export_sweep_summary, summarize
from .model import (
    Protocol,
    dump_config,
    hyperperiod,
    load_config,
    load_overheads,
    validate_config,
    with_overheads,
    with_protocol,
)
from .utils.durations import format_duration, parse_duration
from .workload import build_testapp_scenario, generate_random_taskset, render_allocation_table

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INVALID = 2
EXIT_FAULT = 3
EXIT_GUARD = 4

THREADS_ENV = "RTSIM_THREADS"


@dataclass(frozen=True)
class RunSpec:
    config: Path
    protocol: Optional[Protocol] = None
    horizon: Optional[int] = None
    seed: int = 0
    overheads: Optional[Path] = None
    out: Path = Path("out")
    verify_guard: bool = False
    verbose: bool = False


def load_scenario(config, protocol=None, overheads=None):
    """Load a scenario file and apply the protocol and overhead overrides."""
    scenario = load_config(config)
    if overheads is not None:
        scenario = with_overheads(scenario, load_overheads(overheads))
    if protocol is not None:
        scenario = with_protocol(scenario, protocol)
    return scenario


def _validated(scenario, label: str):
    report = validate_config(*scenario)
    if not report.ok:
        print(f"{label}: invalid configuration", file=sys.stderr)
        print(report, file=sys.stderr)
        return None
    return scenario


def _horizon(spec_horizon, scenario) -> int:
    return spec_horizon if spec_horizon is not None else hyperperiod(scenario.tasks)


def _write_run_outputs(trace, out: Path):
    stats = summarize(trace)
    export_csv(trace, out / "events.csv")
    export_csv(stats, out / "summary.csv")
    export_populations_csv(stats, out / "populations.csv")
    return stats


def cmd_run(spec: RunSpec) -> int:
    try:
        scenario = load_scenario(spec.config, spec.protocol, spec.overheads)
    except ConfigError as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_INVALID
    if _validated(scenario, str(spec.config)) is None:
        return EXIT_INVALID
    horizon = _horizon(spec.horizon, scenario)
    try:
        trace = run_scenario(scenario, horizon, seed=spec.seed, verbose=spec.verbose)
        stats = _write_run_outputs(trace, spec.out)
    except SimulationFault as exc:
        print(f"internal invariant breached: {exc.message}", file=sys.stderr)
        return EXIT_FAULT
    except ExportError as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_INVALID
    logger.info(
        "%s over %s: %d events, %d misses, %d censored jobs, outputs in %s",
        trace.protocol,
        format_duration(horizon),
        len(trace),
        stats.misses,
        stats.censored,
        spec.out,
    )
    if spec.verify_guard:
        config, tasks, resources = scenario
        try:
            check_guard(tasks, resources, horizon)
        except OracleGuardError as exc:
            logger.info("Oracle check skipped: %s", exc.message)
            return EXIT_OK
        differences = compare_traces(step_oracle(config, tasks, resources, horizon, seed=spec.seed), trace)
        if differences:
            print("\n".join(differences))
            return EXIT_MISMATCH
        logger.info("Oracle check passed.")
    return EXIT_OK


def _cell_label(protocol: Protocol, overheads: Optional[Path]) -> str:
    return protocol.value if overheads is None else f"{protocol.value}-{Path(overheads).stem}"


def _run_cell(spec: RunSpec, protocol: Protocol, overheads: Optional[Path]):
    label = _cell_label(protocol, overheads)
    scenario = load_scenario(spec.config, protocol, overheads)
    report = validate_config(*scenario)
    if not report.ok:
        raise ConfigError(f"{label}: invalid configuration\n{report}")
    trace = run_scenario(scenario, _horizon(spec.horizon, scenario), seed=spec.seed)
    return _write_run_outputs(trace, spec.out / label)


def sweep_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, os.cpu_count() or 1)))
    except ValueError:
        logger.warning("Ignoring non-numeric %s.", THREADS_ENV)
        return 1


def cmd_sweep(spec: RunSpec, protocols: List[Protocol], overhead_files: List[Path]) -> int:
    """Run every protocol under every overhead file and merge the summaries."""
    if not protocols:
        print("sweep needs at least one protocol", file=sys.stderr)
        return EXIT_INVALID
    variants = list(overhead_files) or [None]
    cells = [(protocol, overheads) for overheads in variants for protocol in protocols]
    with ThreadPoolExecutor(max_workers=min(sweep_threads(), len(cells))) as pool:
        futures = [pool.submit(_run_cell, spec, protocol, overheads) for protocol, overheads in cells]
    merged = []
    failures = 0
    fault = False
    for (protocol, overheads), future in zip(cells, futures):
        label = _cell_label(protocol, overheads)
        try:
            stats = future.result()
        except SimulationFault as exc:
            print(f"{label}: internal invariant breached: {exc.message}", file=sys.stderr)
            failures += 1
            fault = True
            continue
        except (ConfigError, ExportError) as exc:
            print(exc.message, file=sys.stderr)
            failures += 1
            continue
        labels = {"protocol": protocol.value, "overheads": "" if overheads is None else Path(overheads).stem}
        merged.append((labels, stats))
    try:
        export_sweep_summary(merged, spec.out / "summary.csv")
    except ExportError as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_INVALID
    logger.info("Sweep finished: %d cell(s) ok, %d failed.", len(merged), failures)
    if fault and not merged:
        return EXIT_FAULT
    return EXIT_MISMATCH if failures else EXIT_OK


def cmd_verify(spec: RunSpec) -> int:
    try:
        scenario = load_scenario(spec.config, spec.protocol, spec.overheads)
    except ConfigError as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_INVALID
    if _validated(scenario, str(spec.config)) is None:
        return EXIT_INVALID
    config, tasks, resources = scenario
    horizon = _horizon(spec.horizon, scenario)
    try:
        oracle_trace = step_oracle(config, tasks, resources, horizon, seed=spec.seed)
        engine_trace = run_scenario(scenario, horizon, seed=spec.seed)
    except OracleGuardError as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_GUARD
    except SimulationFault as exc:
        print(f"internal invariant breached: {exc.message}", file=sys.stderr)
        return EXIT_FAULT
    differences = compare_traces(oracle_trace, engine_trace)
    if differences:
        print("\n".join(differences))
        return EXIT_MISMATCH
    logger.info("Engine and oracle agree on %d events.", len(engine_trace))
    return EXIT_OK


def cmd_testapp(protocol: Protocol, out: Path) -> int:
    scenario = build_testapp_scenario(protocol=protocol)
    comments = ["Test application allocation: 3 application processors, 5 priority levels, 3 resources."]
    comments.extend(render_allocation_table(scenario).splitlines())
    try:
        dump_config(scenario, out, comments=comments)
    except ConfigError as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        scenario = generate_random_taskset(
            seed=args.seed,
            M=args.processors,
            n=args.tasks,
            Z=args.resources,
            utilization_target=args.utilization,
            cs_ratio_range=(args.cs_min, args.cs_max),
            protocol=args.protocol,
            period_range=(args.min_period, args.max_period),
            granularity=args.granularity,
        )
        dump_config(scenario, args.out, comments=[f"Random task set, seed {args.seed}."])
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except ConfigError as exc:
        print(exc.message, file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _protocol(text: str) -> Protocol:
    try:
        return Protocol.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _protocol_list(text: str) -> List[Protocol]:
    return [_protocol(name) for name in text.split(",") if name.strip()]


def _duration(text: str) -> int:
    try:
        value = parse_duration(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(exc.message)
    if value <= 0:
        raise argparse.ArgumentTypeError("horizon must be positive")
    return value


def _add_run_arguments(parser, sweep: bool = False):
    parser.add_argument("--config", type=Path, required=True, help="Scenario file.")
    if not sweep:
        parser.add_argument("--protocol", type=_protocol, help="Override the scenario's protocol.")
    parser.add_argument("--horizon", type=_duration, help="Simulated time, e.g. 20ms. Default: one hyperperiod.")
    parser.add_argument("--seed", type=int, default=0, help="Recorded in the trace fingerprint.")
    if sweep:
        parser.add_argument("--overheads", type=Path, nargs="*", default=[], help="Overhead files, one sweep cell per file and protocol.")
    else:
        parser.add_argument("--overheads", type=Path, help="Overhead file replacing the scenario's [overheads].")
    parser.add_argument("--out", type=Path, default=Path("out"), help="Output directory.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtsim", description="Multiprocessor locking-protocol simulator.")
    parser.add_argument("--verbose", action="store_true", help="Log every trace event.")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Simulate one scenario and write events, summary and overhead samples.")
    _add_run_arguments(run)
    run.add_argument("--verify-guard", action="store_true", help="Also compare with the step oracle when the instance is small enough.")

    sweep = commands.add_parser("sweep", help="Run a scenario under several protocols and overhead files.")
    _add_run_arguments(sweep, sweep=True)
    sweep.add_argument(
        "--protocols",
        type=_protocol_list,
        default=list(Protocol),
        help="Comma-separated protocols. Default: all five.",
    )

    verify = commands.add_parser("verify", help="Compare the engine with the tick-by-tick oracle.")
    _add_run_arguments(verify)

    testapp = commands.add_parser("testapp", help="Write the evaluation task set as a scenario file.")
    testapp.add_argument("--protocol", type=_protocol, default=Protocol.DPCP)
    testapp.add_argument("--out", type=Path, default=Path("testapp.cfg"))

    generate = commands.add_parser("generate", help="Write a random task set as a scenario file.")
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--processors", type=int, default=4)
    generate.add_argument("--tasks", type=int, default=8)
    generate.add_argument("--resources", type=int, default=2)
    generate.add_argument("--utilization", type=float, default=1.0)
    generate.add_argument("--cs-min", type=float, default=0.05)
    generate.add_argument("--cs-max", type=float, default=0.2)
    generate.add_argument("--protocol", type=_protocol, default=Protocol.MPCP)
    generate.add_argument("--min-period", type=_duration, default=10_000)
    generate.add_argument("--max-period", type=_duration, default=1_000_000)
    generate.add_argument("--granularity", type=_duration, default=1_000)
    generate.add_argument("--out", type=Path, default=Path("random.cfg"))
    return parser


def _run_spec(args) -> RunSpec:
    return RunSpec(
        config=args.config,
        protocol=getattr(args, "protocol", None),
        horizon=args.horizon,
        seed=args.seed,
        overheads=None if args.command == "sweep" else args.overheads,
        out=args.out,
        verify_guard=getattr(args, "verify_guard", False),
        verbose=args.verbose,
    )


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return cmd_run(_run_spec(args))
    if args.command == "sweep":
        return cmd_sweep(_run_spec(args), args.protocols, args.overheads)
    if args.command == "verify":
        return cmd_verify(_run_spec(args))
    if args.command == "testapp":
        return cmd_testapp(args.protocol, args.out)
    return cmd_generate(args)

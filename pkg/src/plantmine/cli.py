"""Command-line front end chaining the pipeline stages.

Subcommands run progressively longer prefixes of the same pipeline:

    simulate -> mine -> reach -> transform -> emit-smv -> verify

with ``pipeline`` running everything.  Each stage persists its artifact under
``--out`` with an atomic write, and the final report lists every stage with
the content digest of its input file.

Exit codes: 0 on success (all specs hold), 1 when verification fails, 2 on
usage or input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import subprocess
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import discovery, eventlog, fixture, petri, smv, transform, verify
from .errors import PlantMineError

DEFAULT_SPEC = "AG !(HOME & END)"

ARTIFACTS = {
    "log": "log.csv",
    "filtered": "filtered.csv",
    "xes": "log.xes",
    "pnml": "net.pnml",
    "dot": "reachability.dot",
    "fb": "plant.fb",
    "smv": "closed_loop.smv",
    "report": "report.txt",
}


class UsageError(PlantMineError):
    pass


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _atomic_write(path: Path, text: str) -> Path:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    os.replace(tmp, path)
    return path


@dataclass
class StageRecord:
    name: str
    inputs: list[tuple[str, str]] = field(default_factory=list)
    started: float = 0.0
    elapsed: float = 0.0


class Runner:
    """Executes stages in order, writing artifacts and recording digests."""

    def __init__(self, out_dir: Path) -> None:
        self.out_dir = out_dir
        self.records: list[StageRecord] = []
        out_dir.mkdir(parents=True, exist_ok=True)

    def artifact(self, key: str) -> Path:
        return self.out_dir / ARTIFACTS[key]

    def stage(self, name: str, inputs: list[Path]) -> StageRecord:
        record = StageRecord(name, [(p.name, _sha256(p)) for p in inputs],
                             started=time.perf_counter())
        self.records.append(record)
        return record

    def finish(self, record: StageRecord) -> None:
        record.elapsed = time.perf_counter() - record.started


def _parse_cycles(text: str) -> tuple[int, int]:
    low, sep, high = text.partition("..")
    if not sep:
        raise UsageError(f"--cycles expects MIN..MAX, got {text!r}")
    try:
        return int(low), int(high)
    except ValueError:
        raise UsageError(f"--cycles expects integers, got {text!r}") from None


def _parse_marking(specs: list[str]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for chunk in specs:
        for pair in chunk.split(","):
            place, sep, count = pair.partition("=")
            if not sep or not place:
                raise UsageError(f"--marking expects place=count pairs, got {pair!r}")
            try:
                counts[place] = int(count)
            except ValueError:
                raise UsageError(f"--marking count must be an integer: {pair!r}") from None
    return counts


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plantmine",
        description="Mine a plant model from an event log and verify it in closed loop.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p: argparse.ArgumentParser) -> None:
        p.add_argument("--log", type=Path, help="input event log (CSV)")
        p.add_argument("--fixture", action="store_true",
                       help="use the simulated two-cylinder fixture as input")
        p.add_argument("--component", default="HC", help="component to keep (default HC)")
        add_sim(p)

    def add_sim(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=42, help="simulator seed")
        p.add_argument("--traces", type=int, default=10, help="number of simulated traces")
        p.add_argument("--cycles", default="1..3", help="cycles per trace, MIN..MAX")
        p.add_argument("--mutate", action="append", default=[],
                       choices=sorted(fixture.MUTATIONS), help="apply a log mutation")

    def add_reach(p: argparse.ArgumentParser) -> None:
        p.add_argument("--marking", action="append", default=[],
                       help="initial marking as place=count pairs (comma separated)")
        p.add_argument("--bound", type=int, default=petri.DEFAULT_BOUND,
                       help="reachability node bound")

    def add_transform(p: argparse.ArgumentParser) -> None:
        p.add_argument("--actionmap", type=Path,
                       help="action map file (defaults to the fixture map with --fixture)")

    def add_verify(p: argparse.ArgumentParser) -> None:
        p.add_argument("--controller", type=Path,
                       help="controller file (defaults to the fixture controller with --fixture)")
        p.add_argument("--spec", action="append", default=[],
                       help=f"CTL property (default: {DEFAULT_SPEC!r})")
        p.add_argument("--strict", action="store_true",
                       help="treat composition diagnostics as verification failure")
        p.add_argument("--nusmv", type=Path,
                       help="optional NuSMV executable; cross-check its verdicts")

    common_out = {"type": Path, "default": Path("out"),
                  "help": "output directory (default ./out)"}

    p = sub.add_parser("simulate", help="generate a fixture event log")
    add_sim(p)
    p.add_argument("--out", **common_out)

    for name, extra in (("mine", []),
                        ("reach", [add_reach]),
                        ("transform", [add_reach, add_transform]),
                        ("emit-smv", [add_reach, add_transform, add_verify]),
                        ("verify", [add_reach, add_transform, add_verify]),
                        ("pipeline", [add_reach, add_transform, add_verify])):
        p = sub.add_parser(name, help=f"run the pipeline through the {name} stage")
        add_source(p)
        for adder in extra:
            adder(p)
        p.add_argument("--out", **common_out)
    return parser


def _sim_config(args: argparse.Namespace) -> fixture.SimConfig:
    low, high = _parse_cycles(args.cycles)
    return fixture.SimConfig(n_traces=args.traces, cycles_min=low, cycles_max=high,
                             mutations=frozenset(args.mutate))


def _execute(args: argparse.Namespace, upto: str) -> int:
    runner = Runner(args.out)

    # --- log acquisition ------------------------------------------------
    if getattr(args, "log", None) is not None:
        log_path = args.log
        record = runner.stage("parse", [log_path] if log_path.exists() else [])
        log = eventlog.parse_csv(_read_text(log_path))
        runner.finish(record)
    else:
        if upto != "simulate" and not getattr(args, "fixture", False):
            raise UsageError("either --log or --fixture is required")
        record = runner.stage("simulate", [])
        log = fixture.simulate_two_cylinder(_sim_config(args), args.seed)
        log_path = _atomic_write(runner.artifact("log"), eventlog.export_csv(log))
        runner.finish(record)
    if upto == "simulate":
        _print_stages(runner)
        return 0

    # --- mine: filter, group, export, discover ---------------------------
    record = runner.stage("mine", [log_path])
    filtered = eventlog.filter_component(log, args.component)
    filtered_path = _atomic_write(runner.artifact("filtered"), eventlog.export_csv(filtered))
    traces = eventlog.group_traces(filtered)
    xes_path = _atomic_write(runner.artifact("xes"), eventlog.export_xes(traces))
    net = discovery.alpha_discover(traces)
    pnml_path = _atomic_write(runner.artifact("pnml"), petri.export_pnml(net))
    log_fitness = discovery.fitness(net, traces)
    runner.finish(record)
    print(f"mined net: {len(net.places)} places, {len(net.transitions)} transitions, "
          f"{len(net.arcs)} arcs; replay fitness {log_fitness:.3f}")
    if upto == "mine":
        _print_stages(runner)
        return 0

    # --- reach: strip, mark, explore -------------------------------------
    record = runner.stage("reach", [pnml_path])
    stripped = petri.strip_boundary(net)
    explicit = _parse_marking(args.marking)
    if explicit:
        marking = petri.Marking.of(explicit)
    elif args.fixture:
        marking = fixture.rest_position_marking(stripped)
    else:
        marking = petri.default_initial_marking(stripped)
    graph = petri.reachability_graph(stripped, marking, bound=args.bound)
    dot_path = _atomic_write(runner.artifact("dot"), petri.export_dot_graph(graph))
    runner.finish(record)
    print(f"reachability: {len(graph.nodes)} markings, {len(graph.edges)} edges "
          f"from {marking}")
    if upto == "reach":
        _print_stages(runner)
        return 0

    # --- transform --------------------------------------------------------
    inputs = [pnml_path] + ([args.actionmap] if args.actionmap else [])
    record = runner.stage("transform", inputs)
    if args.actionmap:
        # Custom maps start all latches false; the fixture map carries the
        # cylinder's rest position instead.
        amap = transform.parse_action_map(_read_text(args.actionmap))
        initial_valuation = {var: False for var in amap.sensor_vars}
    elif args.fixture:
        amap = fixture.fixture_action_map()
        initial_valuation = dict(fixture.INITIAL_VALUATION)
    else:
        raise UsageError("--actionmap is required without --fixture")
    fsm = transform.fsm_from_graph(graph)
    fb = transform.build_plant_fb(fsm, amap, initial_valuation,
                                  name=f"{args.component}_PLANT")
    fb_path = _atomic_write(runner.artifact("fb"), transform.export_fb(fb))
    runner.finish(record)
    print(f"plant block: {len(fb.states)} states, {len(fb.transitions)} transitions, "
          f"inputs {list(fb.event_inputs)}, outputs {list(fb.event_outputs)}")
    if upto == "transform":
        _print_stages(runner)
        return 0

    # --- controller and specs ---------------------------------------------
    if args.controller:
        controller = verify.parse_controller(_read_text(args.controller))
    elif args.fixture:
        controller = fixture.fixture_controller()
    else:
        raise UsageError("--controller is required without --fixture")
    spec_texts = args.spec or [DEFAULT_SPEC]
    formulas = [verify.parse_ctl(text) for text in spec_texts]

    # --- emit-smv -----------------------------------------------------------
    inputs = [fb_path] + ([args.controller] if args.controller else [])
    record = runner.stage("emit-smv", inputs)
    document = smv.emit_closed_loop(fb, controller, tuple(formulas))
    smv_path = _atomic_write(runner.artifact("smv"), document.text)
    runner.finish(record)
    if upto == "emit-smv":
        _print_stages(runner)
        return 0

    # --- verify ---------------------------------------------------------
    record = runner.stage("verify", [smv_path])
    structure = verify.compose(fb, controller)
    verdicts = [verify.check_ctl(structure, formula) for formula in formulas]
    runner.finish(record)

    nusmv_lines: list[str] = []
    agreement = True
    if getattr(args, "nusmv", None):
        agreement, nusmv_lines = _cross_check_nusmv(args.nusmv, smv_path, verdicts)

    failed = [i for i, v in enumerate(verdicts) if not v.holds]
    strict_block = args.strict and structure.diagnostics
    ok = not failed and not strict_block and agreement
    report = _render_report(runner, formulas, verdicts, structure, fb,
                            strict=args.strict, nusmv_lines=nusmv_lines, ok=ok)
    _atomic_write(runner.artifact("report"), report)
    print(report, end="")
    return 0 if ok else 1


def _print_stages(runner: Runner) -> None:
    for record in runner.records:
        inputs = " ".join(f"{name} sha256={digest}" for name, digest in record.inputs) or "-"
        print(f"stage {record.name}: inputs {inputs} ({record.elapsed:.3f}s)")


def _render_report(runner: Runner, formulas, verdicts, structure, fb,
                   strict: bool, nusmv_lines: list[str], ok: bool) -> str:
    sensor_vars = set(fb.sensor_vars)
    lines = ["plantmine verification report",
             "=============================",
             "stages:"]
    for record in runner.records:
        inputs = ", ".join(f"{name} sha256={digest}"
                           for name, digest in record.inputs) or "-"
        lines.append(f"  {record.name}: inputs: {inputs}; elapsed {record.elapsed:.3f}s")
    lines.append("specs:")
    for formula, verdict in zip(formulas, verdicts):
        status = "HOLDS" if verdict.holds else "FAILED"
        lines.append(f"  {verify.render_ctl(formula)}: {status}")
        if verdict.counterexample:
            lines.append(f"  counterexample ({len(verdict.counterexample)} states):")
            for index, step in enumerate(verdict.counterexample):
                state = step.state
                labels = ",".join(sorted(structure.labels[state] & sensor_vars)) or "-"
                via = f" [{step.event}]" if step.event else ""
                lines.append(f"    {index}:{via} {state} labels={labels}")
    if structure.diagnostics:
        lines.append(f"diagnostics ({len(structure.diagnostics)}):")
        for diag in structure.diagnostics:
            lines.append(f"  {diag.kind}: {diag.event} at {diag.state}")
        if strict:
            lines.append("strict mode: diagnostics fail the run")
    else:
        lines.append("diagnostics: none")
    lines.extend(nusmv_lines)
    lines.append(f"result: {'PASS' if ok else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _cross_check_nusmv(executable: Path, smv_path: Path,
                       verdicts) -> tuple[bool, list[str]]:
    """Run NuSMV on the emitted document and compare spec verdicts."""
    try:
        result = subprocess.run([str(executable), str(smv_path)],
                                capture_output=True, text=True, timeout=120)
    except (OSError, subprocess.TimeoutExpired) as exc:
        raise UsageError(f"cannot run NuSMV: {exc}") from None
    external: list[bool] = []
    for line in result.stdout.splitlines():
        line = line.strip()
        if line.startswith("-- specification") and line.endswith("is true"):
            external.append(True)
        elif line.startswith("-- specification") and line.endswith("is false"):
            external.append(False)
    if len(external) != len(verdicts):
        return False, [f"nusmv: expected {len(verdicts)} verdicts, parsed {len(external)}"]
    agreement = all(v.holds == ext for v, ext in zip(verdicts, external))
    lines = [f"nusmv: {'agreement' if agreement else 'MISMATCH'} "
             f"({', '.join('true' if e else 'false' for e in external)})"]
    return agreement, lines


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _execute(args, args.command)
    except PlantMineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""``wastefinder`` command line: gen, detect, report, merge, bench."""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from . import __version__
from .classifier import EqualityConfig, PairKind
from .detector import DetectorConfig, run_sampled
from .generators import PATTERNS, generate
from .oracle import detect_exact
from .pmu import DEFAULT_PERIOD
from .profile import compute_metrics, confidence_interval, dumps_profile, loads_profile, merge
from .report import percent, render_json, render_text
from .trace import Trace, TraceError, load_trace, serialize_trace
from .watchpoints import DEFAULT_REGISTERS, MAX_REGISTERS

EX_OK = 0
EX_PARSE = 2
EX_USAGE = 64
EX_DATAERR = 65
EX_IOERR = 74


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunManifest:
    command: str
    mode: Optional[str] = None
    exact: Optional[bool] = None
    period: Optional[int] = None
    phase: Optional[int] = None
    registers: Optional[int] = None
    seed: Optional[int] = None
    fp_threshold: Optional[float] = None
    trace: Optional[str] = None
    runs: Optional[int] = None
    pattern: Optional[str] = None
    size: Optional[int] = None

    def to_dict(self) -> dict:
        d = {"tool": "wastefinder", "version": __version__}
        d.update({k: v for k, v in asdict(self).items() if v is not None})
        return d


def atomic_write(path: str, data: str | bytes):
    """Write via a temp file in the target directory, then rename over ``path``."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".wastefinder-", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit integer, got {v}")
    return v


def _registers(text: str) -> int:
    v = _positive(text)
    if v > MAX_REGISTERS:
        raise argparse.ArgumentTypeError(f"registers must be in 1..{MAX_REGISTERS}")
    return v


def _add_detection_flags(p: argparse.ArgumentParser):
    p.add_argument("--mode", required=True, choices=[k.value for k in PairKind])
    p.add_argument("--trace", required=True, help="JSONL trace file")
    p.add_argument("--period", type=_positive, default=DEFAULT_PERIOD, help="subscribed events per PMU sample")
    p.add_argument("--phase", type=_u64, default=0, help="initial PMU counter offset, < period")
    p.add_argument("--registers", type=_registers, default=DEFAULT_REGISTERS)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--fp-threshold", type=float, default=0.01, help="relative FP equality threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wastefinder", description="Sampling-based detection of wasteful memory operations")
    parser.add_argument("--version", action="version", version=f"wastefinder {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a synthetic trace")
    g.add_argument("pattern", help=" | ".join(PATTERNS))
    g.add_argument("--n", "--iters", dest="size", type=_positive, required=True,
                   help="element count (two-pass-scan) or iteration count")
    g.add_argument("--seed", type=_u64, default=0)
    g.add_argument("-o", "--output", required=True)

    d = sub.add_parser("detect", help="run sampled or exact detection over a trace")
    _add_detection_flags(d)
    d.add_argument("--exact", action="store_true", help="exhaustive oracle instead of sampling")
    d.add_argument("--profile-out", help="profile JSON path (default: <trace>.<mode>.profile.json)")
    d.add_argument("--report-out", help="text report path (default: <trace>.<mode>.report.txt)")
    d.add_argument("--top", type=_positive, default=10)

    r = sub.add_parser("report", help="render a profile with calling contexts")
    r.add_argument("--profile", required=True)
    r.add_argument("--trace", required=True, help="trace supplying the context table")
    r.add_argument("--top", type=_positive, default=10)
    r.add_argument("--json", action="store_true")
    r.add_argument("-o", "--output")

    m = sub.add_parser("merge", help="coalesce profiles by calling-context pair")
    m.add_argument("profiles", nargs="+")
    m.add_argument("-o", "--output", required=True)

    b = sub.add_parser("bench", help="repeat sampled detection and report a confidence interval")
    _add_detection_flags(b)
    b.add_argument("--runs", type=int, default=30)
    b.add_argument("-o", "--output", help="also write the bench summary here")
    return parser


def _detector_config(args) -> DetectorConfig:
    if args.phase >= args.period:
        raise UsageError("--phase must be smaller than --period")
    try:
        eq = EqualityConfig(args.fp_threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return DetectorConfig(PairKind(args.mode), period=args.period, phase=args.phase,
                          registers=args.registers, seed=args.seed, equality=eq)


def _default_out(trace_path: str, mode: str, exact: bool, suffix: str) -> str:
    tag = f"{mode}-exact" if exact else mode
    return f"{trace_path}.{tag}.{suffix}"


def cmd_gen(args) -> int:
    if args.pattern not in PATTERNS:
        raise UsageError(f"unknown pattern {args.pattern!r}; expected one of {', '.join(PATTERNS)}")
    trace = generate(args.pattern, args.size, args.seed)
    manifest = RunManifest("gen", pattern=args.pattern, size=args.size, seed=args.seed)
    trace = Trace(trace.records, trace.contexts, manifest.to_dict())
    atomic_write(args.output, serialize_trace(trace))
    print(f"wrote {len(trace.events)} events to {args.output}")
    return EX_OK


def cmd_detect(args) -> int:
    cfg = _detector_config(args)
    trace = load_trace(args.trace)
    if args.exact:
        profile = detect_exact(trace, cfg.kind, cfg.equality).to_profile()
    else:
        profile = run_sampled(trace, cfg)
    manifest = RunManifest(
        "detect", mode=args.mode, exact=args.exact, period=args.period, phase=args.phase,
        registers=args.registers, seed=args.seed, fp_threshold=args.fp_threshold, trace=args.trace,
    ).to_dict()
    summary = compute_metrics(profile)
    profile_out = args.profile_out or _default_out(args.trace, args.mode, args.exact, "profile.json")
    report_out = args.report_out or _default_out(args.trace, args.mode, args.exact, "report.txt")
    atomic_write(profile_out, dumps_profile(profile, manifest))
    atomic_write(report_out, render_text(summary, trace.contexts, args.top, manifest))
    print(f"{args.mode} fraction: {percent(summary.program_fraction)}")
    return EX_OK


def cmd_report(args) -> int:
    try:
        with open(args.profile, encoding="utf-8") as fh:
            profile, manifest = loads_profile(fh.read())
        trace = load_trace(args.trace)
        summary = compute_metrics(profile)
        if args.json:
            out = render_json(summary, trace.contexts, manifest)
        else:
            out = render_text(summary, trace.contexts, args.top, manifest)
    except (ValueError, KeyError) as exc:  # TraceError and JSON errors are ValueErrors
        print(f"wastefinder report: {exc}", file=sys.stderr)
        return EX_PARSE
    if args.output:
        atomic_write(args.output, out)
    else:
        sys.stdout.write(out)
    return EX_OK


def cmd_merge(args) -> int:
    profiles = []
    for path in args.profiles:
        with open(path, encoding="utf-8") as fh:
            try:
                profiles.append(loads_profile(fh.read())[0])
            except ValueError as exc:
                raise TraceError(f"{path}: {exc}") from None
    try:
        merged = merge(profiles)
    except ValueError as exc:
        raise TraceError(str(exc)) from None
    manifest = RunManifest("merge", mode=merged.kind.value if merged.kind else None).to_dict()
    manifest["inputs"] = list(args.profiles)
    atomic_write(args.output, dumps_profile(merged, manifest))
    print(f"merged {len(profiles)} profiles: fraction {percent(compute_metrics(merged).program_fraction)}")
    return EX_OK


def _bench_run(payload) -> float:
    trace, cfg = payload
    return compute_metrics(run_sampled(trace, cfg)).program_fraction


def worker_count() -> int:
    raw = os.environ.get("WASTEFINDER_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"WASTEFINDER_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError("WASTEFINDER_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def cmd_bench(args) -> int:
    if args.runs < 2:
        raise UsageError("--runs must be at least 2")
    base = _detector_config(args)
    workers = worker_count()
    trace = load_trace(args.trace)
    cfgs = [DetectorConfig(base.kind, base.period, base.phase, base.registers, args.seed + i, base.equality)
            for i in range(args.runs)]
    payloads = [(trace, c) for c in cfgs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, args.runs)) as pool:
            fractions = list(pool.map(_bench_run, payloads))
    else:
        fractions = [_bench_run(p) for p in payloads]
    mean, half = confidence_interval(fractions)
    oracle = detect_exact(trace, base.kind, base.equality).fraction
    manifest = RunManifest(
        "bench", mode=args.mode, period=args.period, phase=args.phase, registers=args.registers,
        seed=args.seed, fp_threshold=args.fp_threshold, trace=args.trace, runs=args.runs,
    ).to_dict()
    lines = ["# manifest " + json.dumps(manifest, sort_keys=True, separators=(",", ":"))]
    lines += [f"run seed={c.seed} fraction={f!r}" for c, f in zip(cfgs, fractions)]
    contains = mean - half <= oracle <= mean + half
    lines.append(f"mean {mean!r} +/- {half!r} (95% CI [{mean - half!r}, {mean + half!r}])")
    lines.append(f"oracle {oracle!r}")
    lines.append(f"ci contains oracle: {'yes' if contains else 'no'}")
    text = "\n".join(lines) + "\n"
    if args.output:
        atomic_write(args.output, text)
    sys.stdout.write(text)
    return EX_OK


COMMANDS = {"gen": cmd_gen, "detect": cmd_detect, "report": cmd_report, "merge": cmd_merge, "bench": cmd_bench}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"wastefinder {args.command}: {exc}", file=sys.stderr)
        return EX_USAGE
    except TraceError as exc:
        print(f"wastefinder {args.command}: {exc}", file=sys.stderr)
        return EX_DATAERR
    except OSError as exc:
        print(f"wastefinder {args.command}: {exc}", file=sys.stderr)
        return EX_IOERR


if __name__ == "__main__":
    sys.exit(main())

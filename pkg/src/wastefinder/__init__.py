"""Trace-driven detection of dead stores, silent stores and silent loads.

PMU sampling and hardware watchpoints are simulated over a recorded trace;
an exhaustive oracle provides the exact fractions the sampled run estimates.
"""
__version__ = "0.1.0"

from .classifier import EqualityConfig, EpisodeOutcome, PairKind, TrapType, Verdict, classify_trap, values_equal
from .detector import DetectorConfig, run_sampled, run_sampled_per_thread
from .generators import gen_dead_store_loop, gen_silent_call_args, gen_two_pass_scan
from .oracle import OracleResult, detect_exact
from .pmu import PmuSampler, SamplerConfig
from .profile import MetricSummary, PairRecord, Profile, compute_metrics, confidence_interval, merge
from .report import render_json, render_text
from .trace import AccessEvent, AccessKind, Trace, TraceError, Value, ValueTag, load_trace, parse_trace, serialize_trace
from .watchpoints import ArmResult, ArmStatus, Watchpoint, WatchpointBank

__all__ = [
    "AccessEvent", "AccessKind", "ArmResult", "ArmStatus", "DetectorConfig", "EpisodeOutcome",
    "EqualityConfig", "MetricSummary", "OracleResult", "PairKind", "PairRecord", "PmuSampler",
    "Profile", "SamplerConfig", "Trace", "TraceError", "TrapType", "Value", "ValueTag", "Verdict",
    "Watchpoint", "WatchpointBank", "classify_trap", "compute_metrics", "confidence_interval",
    "detect_exact", "gen_dead_store_loop", "gen_silent_call_args", "gen_two_pass_scan",
    "load_trace", "merge", "parse_trace", "render_json", "render_text", "run_sampled",
    "run_sampled_per_thread", "serialize_trace", "values_equal",
]

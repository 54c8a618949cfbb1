"""Text and JSON rendering of ranked redundancy pairs."""
from __future__ import annotations

import json
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Mapping, Optional

from .classifier import PairKind
from .profile import MetricSummary, RankedPair
from .trace import CallingContext

RULE = "-" * 80
SEPARATOR = "******** REDUNDANT WITH ********"


def percent(fraction: float) -> str:
    """``0.5 -> '50.00%'``, rounding the exact binary value half-to-even."""
    q = (Decimal(fraction) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN)
    return f"{q}%"


def render_frame(frame) -> str:
    return f"{frame.function_name}:{frame.source_line} [{frame.instruction_tag}]"


def render_stack(ctx: CallingContext) -> list[str]:
    return [" " * depth + render_frame(f) for depth, f in enumerate(ctx.frames)]


def _lookup(contexts: Mapping[int, CallingContext], cid: int) -> CallingContext:
    try:
        return contexts[cid]
    except KeyError:
        raise KeyError(f"context {cid} not found in trace context table") from None


def render_text(
    summary: MetricSummary,
    contexts: Mapping[int, CallingContext],
    top_k: int = 10,
    manifest: Optional[dict] = None,
) -> str:
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    kind = summary.kind.value if summary.kind is not None else "unknown"
    lines = []
    if manifest is not None:
        lines.append("# manifest " + json.dumps(manifest, sort_keys=True, separators=(",", ":")))
    lines.append(
        f"{kind} fraction: {percent(summary.program_fraction)} "
        f"({summary.wasteful_bytes} of {summary.total_bytes} bytes in completed episodes)"
    )
    shown = summary.ranked_pairs[:top_k]
    if not shown:
        lines.append("no pairs")
        return "\n".join(lines) + "\n"
    lines.append(f"top {len(shown)} of {len(summary.ranked_pairs)} pairs")
    for rank, rp in enumerate(shown, start=1):
        lines.append(RULE)
        lines.append(
            f"#{rank} pair fraction {percent(rp.pair_fraction)}  "
            f"wasteful {rp.wasteful_bytes} B of {rp.total_bytes} B  episodes {rp.pair_count}  "
            f"contexts {rp.armed_ctx} -> {rp.trap_ctx}"
        )
        lines.extend(render_stack(_lookup(contexts, rp.armed_ctx)))
        lines.append(SEPARATOR)
        lines.extend(render_stack(_lookup(contexts, rp.trap_ctx)))
    lines.append(RULE)
    return "\n".join(lines) + "\n"


def _frames_json(ctx: CallingContext) -> list[dict]:
    return [{"fn": f.function_name, "line": f.source_line, "ins": f.instruction_tag} for f in ctx.frames]


def summary_to_dict(
    summary: MetricSummary,
    contexts: Optional[Mapping[int, CallingContext]] = None,
    manifest: Optional[dict] = None,
) -> dict:
    d: dict = {}
    if manifest is not None:
        d["manifest"] = manifest
    d["kind"] = summary.kind.value if summary.kind is not None else None
    d["program_fraction"] = summary.program_fraction
    d["wasteful_bytes"] = summary.wasteful_bytes
    d["total_bytes"] = summary.total_bytes
    pairs = []
    for rank, rp in enumerate(summary.ranked_pairs, start=1):
        row = {
            "rank": rank,
            "armed_ctx": rp.armed_ctx,
            "trap_ctx": rp.trap_ctx,
            "wasteful_bytes": rp.wasteful_bytes,
            "total_bytes": rp.total_bytes,
            "pair_count": rp.pair_count,
            "pair_fraction": rp.pair_fraction,
        }
        if contexts is not None:
            row["armed_frames"] = _frames_json(_lookup(contexts, rp.armed_ctx))
            row["trap_frames"] = _frames_json(_lookup(contexts, rp.trap_ctx))
        pairs.append(row)
    d["pairs"] = pairs
    return d


def render_json(
    summary: MetricSummary,
    contexts: Optional[Mapping[int, CallingContext]] = None,
    manifest: Optional[dict] = None,
) -> str:
    # floats go through repr, which round-trips exactly
    return json.dumps(summary_to_dict(summary, contexts, manifest), indent=2) + "\n"


def parse_summary_json(text: str) -> MetricSummary:
    d = json.loads(text)
    kind = PairKind(d["kind"]) if d["kind"] is not None else None
    pairs = tuple(
        RankedPair(int(r["armed_ctx"]), int(r["trap_ctx"]), int(r["wasteful_bytes"]),
                   int(r["total_bytes"]), int(r["pair_count"]), float(r["pair_fraction"]))
        for r in sorted(d["pairs"], key=lambda r: r["rank"])
    )
    return MetricSummary(kind, float(d["program_fraction"]), int(d["wasteful_bytes"]),
                         int(d["total_bytes"]), pairs)

"""Trace data model and the JSON Lines trace format.

A trace is the boundary that stands in for the JVM and the hardware: every
load and store a thread performs, the calling contexts those accesses were
issued from, and garbage-collection epoch markers.

Record kinds, one JSON object per line::

    {"t":"meta","manifest":{...}}                       optional, first line only
    {"t":"ctx","id":7,"frames":[{"fn":"FFT.inverse","line":52,"ins":"vmovsd"}]}
    {"t":"ev","tid":0,"seq":12,"k":"S","addr":4096,"w":8,"vt":"i","v":5,"ctx":7}
    {"t":"epoch","id":1}

Context records must precede their first use.
"""
from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import IO, Any, Iterable, Iterator, Union

import numpy as np

VALID_WIDTHS = (1, 2, 4, 8)
INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1
ADDR_LIMIT = 2**64


class TraceError(ValueError):
    """A trace failed to parse or validate."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        self.reason = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


class AccessKind(str, Enum):
    LOAD = "L"
    STORE = "S"


class ValueTag(str, Enum):
    INT = "i"
    F32 = "f32"
    F64 = "f64"

    @property
    def is_float(self) -> bool:
        return self is not ValueTag.INT


@dataclass(frozen=True)
class Value:
    tag: ValueTag
    payload: Union[int, float]

    @classmethod
    def of_int(cls, v: int) -> "Value":
        return cls(ValueTag.INT, int(v))

    @classmethod
    def of_f64(cls, v: float) -> "Value":
        return cls(ValueTag.F64, float(v))

    @classmethod
    def of_f32(cls, v: float) -> "Value":
        # round to the nearest single so the payload is exactly representable
        return cls(ValueTag.F32, float(np.float32(v)))


@dataclass(frozen=True, slots=True)
class AccessEvent:
    thread_id: int
    seq: int
    kind: AccessKind
    address: int
    width: int
    value: Value
    context_id: int

    @property
    def end(self) -> int:
        """One past the last byte touched."""
        return self.address + self.width

    @property
    def is_store(self) -> bool:
        return self.kind is AccessKind.STORE

    def overlaps(self, other: "AccessEvent") -> bool:
        return self.address < other.end and other.address < self.end


@dataclass(frozen=True)
class Frame:
    function_name: str
    source_line: int
    instruction_tag: str


@dataclass(frozen=True)
class CallingContext:
    context_id: int
    frames: tuple[Frame, ...]


@dataclass(frozen=True)
class EpochMarker:
    epoch_id: int
    position: int


Record = Union[AccessEvent, EpochMarker]


@dataclass(frozen=True)
class Trace:
    """Ordered records plus the context table.

    ``records`` interleaves events and epoch markers; ``position`` of a
    marker is its index in ``records``. Events before the first marker
    belong to epoch 0.
    """

    records: tuple[Record, ...]
    contexts: dict[int, CallingContext]
    meta: dict[str, Any] | None = field(default=None, compare=False)

    @cached_property
    def events(self) -> list[AccessEvent]:
        return [r for r in self.records if isinstance(r, AccessEvent)]

    @cached_property
    def epoch_count(self) -> int:
        return 1 + sum(isinstance(r, EpochMarker) for r in self.records)

    def tagged_events(self) -> Iterator[tuple[int, AccessEvent]]:
        """Yield ``(epoch_id, event)`` in global order."""
        epoch = 0
        for r in self.records:
            if isinstance(r, EpochMarker):
                epoch = r.epoch_id
            else:
                yield epoch, r

    @cached_property
    def by_thread(self) -> dict[int, list[tuple[int, AccessEvent]]]:
        out: dict[int, list[tuple[int, AccessEvent]]] = {}
        for epoch, ev in self.tagged_events():
            out.setdefault(ev.thread_id, []).append((epoch, ev))
        return dict(sorted(out.items()))

    @property
    def thread_ids(self) -> list[int]:
        return list(self.by_thread)


# ---------------------------------------------------------------------------
# parsing


def _require(obj: dict, key: str, lineno: int) -> Any:
    try:
        return obj[key]
    except KeyError:
        raise TraceError(f"missing field {key!r}", lineno) from None


def _as_int(x: Any, what: str, lineno: int) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise TraceError(f"{what} must be an integer, got {x!r}", lineno)
    return x


def _parse_value(tag_s: Any, raw: Any, width: int, lineno: int) -> Value:
    try:
        tag = ValueTag(tag_s)
    except ValueError:
        raise TraceError(f"unknown value type {tag_s!r}", lineno) from None
    if tag is ValueTag.INT:
        v = _as_int(raw, "integer value", lineno)
        if not INT64_MIN <= v <= INT64_MAX:
            raise TraceError(f"integer value {v} outside signed 64-bit range", lineno)
        return Value(tag, v)
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise TraceError(f"floating-point value must be a number, got {raw!r}", lineno)
    f = float(raw)
    if math.isinf(f):
        raise TraceError("floating-point value must be finite or NaN", lineno)
    expected_width = 4 if tag is ValueTag.F32 else 8
    if width != expected_width:
        raise TraceError(f"width {width} does not match value type {tag.value}", lineno)
    if tag is ValueTag.F32 and not math.isnan(f):
        with np.errstate(over="ignore"):
            single = np.float32(f)
        if float(single) != f:
            raise TraceError(f"value {f!r} is not representable as f32", lineno)
    return Value(tag, f)


def _parse_frames(raw: Any, lineno: int) -> tuple[Frame, ...]:
    if not isinstance(raw, list) or not raw:
        raise TraceError("context frames must be a non-empty list", lineno)
    frames = []
    for fr in raw:
        if not isinstance(fr, dict):
            raise TraceError("frame must be an object", lineno)
        fn = _require(fr, "fn", lineno)
        line = _as_int(_require(fr, "line", lineno), "frame line", lineno)
        ins = _require(fr, "ins", lineno)
        if not isinstance(fn, str) or not isinstance(ins, str) or line < 0:
            raise TraceError("malformed frame", lineno)
        frames.append(Frame(fn, line, ins))
    return tuple(frames)


def _iter_lines(source: Union[bytes, str, IO]) -> Iterator[str]:
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    elif isinstance(source, str):
        source = io.StringIO(source)
    for lineno, line in enumerate(source, start=1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError:
                raise TraceError("not valid UTF-8", lineno) from None
        yield line


def parse_trace(source: Union[bytes, str, IO]) -> Trace:
    """Parse and validate a JSONL trace from bytes, text, or a file object.

    Raises :class:`TraceError` carrying the 1-based line number of the first
    offending record.
    """
    records: list[Record] = []
    contexts: dict[int, CallingContext] = {}
    last_seq: dict[int, int] = {}
    next_epoch = 1
    meta = None

    for lineno, line in enumerate(_iter_lines(source), start=1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"malformed JSON ({exc.msg})", lineno) from None
        if not isinstance(obj, dict):
            raise TraceError("record must be a JSON object", lineno)
        t = obj.get("t")
        if t == "ev":
            tid = _as_int(_require(obj, "tid", lineno), "tid", lineno)
            seq = _as_int(_require(obj, "seq", lineno), "seq", lineno)
            if tid < 0:
                raise TraceError("tid must be non-negative", lineno)
            try:
                kind = AccessKind(_require(obj, "k", lineno))
            except ValueError:
                raise TraceError(f"unknown access kind {obj['k']!r}", lineno) from None
            addr = _as_int(_require(obj, "addr", lineno), "addr", lineno)
            width = _as_int(_require(obj, "w", lineno), "width", lineno)
            if width not in VALID_WIDTHS:
                raise TraceError(f"invalid width {width}", lineno)
            if not 0 <= addr <= ADDR_LIMIT - width:
                raise TraceError(f"address {addr} outside 64-bit address space", lineno)
            value = _parse_value(_require(obj, "vt", lineno), _require(obj, "v", lineno), width, lineno)
            ctx = _as_int(_require(obj, "ctx", lineno), "ctx", lineno)
            if ctx not in contexts:
                raise TraceError(f"unknown context {ctx}", lineno)
            prev = last_seq.get(tid)
            if prev is not None and seq <= prev:
                raise TraceError(f"non-monotone seq {seq} after {prev} in thread {tid}", lineno)
            last_seq[tid] = seq
            records.append(AccessEvent(tid, seq, kind, addr, width, value, ctx))
        elif t == "ctx":
            cid = _as_int(_require(obj, "id", lineno), "context id", lineno)
            if cid in contexts:
                raise TraceError(f"duplicate context {cid}", lineno)
            contexts[cid] = CallingContext(cid, _parse_frames(_require(obj, "frames", lineno), lineno))
        elif t == "epoch":
            eid = _as_int(_require(obj, "id", lineno), "epoch id", lineno)
            if eid != next_epoch:
                raise TraceError(f"epoch id {eid} out of order, expected {next_epoch}", lineno)
            next_epoch += 1
            records.append(EpochMarker(eid, len(records)))
        elif t == "meta":
            if lineno != 1:
                raise TraceError("meta record must be the first line", lineno)
            meta = obj.get("manifest", {})
        else:
            raise TraceError(f"unknown record type {t!r}", lineno)

    return Trace(tuple(records), contexts, meta)


def load_trace(path: Union[str, os.PathLike]) -> Trace:
    with open(path, "rb") as fh:
        return parse_trace(fh)


# ---------------------------------------------------------------------------
# serialization


def _dumps(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def _event_obj(ev: AccessEvent) -> dict:
    v = ev.value.payload
    return {
        "t": "ev",
        "tid": ev.thread_id,
        "seq": ev.seq,
        "k": ev.kind.value,
        "addr": ev.address,
        "w": ev.width,
        "vt": ev.value.tag.value,
        "v": int(v) if ev.value.tag is ValueTag.INT else float(v),
        "ctx": ev.context_id,
    }


def _context_obj(ctx: CallingContext) -> dict:
    return {
        "t": "ctx",
        "id": ctx.context_id,
        "frames": [
            {"fn": f.function_name, "line": f.source_line, "ins": f.instruction_tag}
            for f in ctx.frames
        ],
    }


def iter_trace_lines(trace: Trace) -> Iterable[str]:
    """Canonical form: meta, contexts in table order, then records."""
    if trace.meta is not None:
        yield _dumps({"t": "meta", "manifest": trace.meta})
    for ctx in trace.contexts.values():
        yield _dumps(_context_obj(ctx))
    for r in trace.records:
        if isinstance(r, EpochMarker):
            yield _dumps({"t": "epoch", "id": r.epoch_id})
        else:
            yield _dumps(_event_obj(r))


def serialize_trace(trace: Trace) -> bytes:
    return "".join(line + "\n" for line in iter_trace_lines(trace)).encode("utf-8")

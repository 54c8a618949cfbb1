"""Synthetic traces reproducing the access patterns of known inefficiencies.

Each generator is deterministic in ``(parameters, seed)``; the seed only
picks base addresses and data values, never the shape of the trace.
"""
from __future__ import annotations

import numpy as np

from .trace import (
    AccessEvent,
    AccessKind,
    CallingContext,
    EpochMarker,
    Frame,
    Record,
    Trace,
    Value,
)

PATTERNS = ("two-pass-scan", "dead-store-loop", "silent-call-args")


class TraceBuilder:
    """Append-only helper that hands out per-thread sequence numbers."""

    def __init__(self):
        self.records: list[Record] = []
        self.contexts: dict[int, CallingContext] = {}
        self._seq: dict[int, int] = {}
        self._epoch = 0

    def context(self, cid: int, *frames: tuple[str, int, str]) -> int:
        self.contexts[cid] = CallingContext(cid, tuple(Frame(*f) for f in frames))
        return cid

    def access(self, kind: AccessKind, addr: int, width: int, value: Value, ctx: int, tid: int = 0):
        seq = self._seq.get(tid, -1) + 1
        self._seq[tid] = seq
        self.records.append(AccessEvent(tid, seq, kind, addr, width, value, ctx))

    def store(self, addr, width, value, ctx, tid=0):
        self.access(AccessKind.STORE, addr, width, value, ctx, tid)

    def load(self, addr, width, value, ctx, tid=0):
        self.access(AccessKind.LOAD, addr, width, value, ctx, tid)

    def epoch(self):
        self._epoch += 1
        self.records.append(EpochMarker(self._epoch, len(self.records)))

    def build(self, meta=None) -> Trace:
        return Trace(tuple(self.records), dict(self.contexts), meta)


def _check_positive(name: str, n: int):
    if int(n) != n or n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n!r}")


def _base_address(rng: np.random.Generator) -> int:
    # 4 KiB-aligned heap-looking base below 2**40
    return int(rng.integers(0x1000, 2**28)) * 0x1000


def gen_two_pass_scan(n: int, seed: int = 0) -> Trace:
    """Initialize ``n`` doubles, then sum the array twice.

    Every load of the second pass re-reads the value the first pass read
    from the same slot (long-distance silent loads).
    """
    _check_positive("n", n)
    rng = np.random.default_rng(seed)
    base = _base_address(rng)
    data = rng.standard_normal(n)

    b = TraceBuilder()
    init = b.context(1, ("Scan.main", 3, "call"), ("Scan.init", 11, "vmovsd %xmm0,(%rax)"))
    first = b.context(2, ("Scan.main", 4, "call"), ("Scan.sum", 20, "vaddsd (%rax),%xmm1"))
    second = b.context(3, ("Scan.main", 4, "call"), ("Scan.sum", 21, "vaddsd (%rax),%xmm2"))
    for i in range(n):
        b.store(base + 8 * i, 8, Value.of_f64(data[i]), init)
    for ctx in (first, second):
        for i in range(n):
            b.load(base + 8 * i, 8, Value.of_f64(data[i]), ctx)
    return b.build()


def gen_dead_store_loop(iters: int, seed: int = 0) -> Trace:
    """A temporary field written twice per iteration with no read between.

    Per iteration: store the field, load an unrelated element, store the
    field again, then read the field. The first store is always dead; the
    second one is consumed by the read.
    """
    _check_positive("iters", iters)
    rng = np.random.default_rng(seed)
    field_addr = _base_address(rng)
    other_base = field_addr + 0x10000
    firsts = rng.standard_normal(iters)
    seconds = rng.standard_normal(iters)
    others = rng.standard_normal(iters)

    b = TraceBuilder()
    write1 = b.context(1, ("Euler.calculateDamping", 5, "vmovsd %xmm0,0x10(%r11)"))
    read_other = b.context(2, ("Euler.calculateDamping", 7, "vmovsd 0x10(%r8),%xmm3"))
    write2 = b.context(3, ("Euler.calculateDamping", 12, "vmovsd %xmm4,0x10(%r11)"))
    read_field = b.context(4, ("Euler.calculateDamping", 14, "vmovsd 0x10(%r11),%xmm5"))
    for i in range(iters):
        b.store(field_addr, 8, Value.of_f64(firsts[i]), write1)
        b.load(other_base + 8 * i, 8, Value.of_f64(others[i]), read_other)
        b.store(field_addr, 8, Value.of_f64(seconds[i]), write2)
        b.load(field_addr, 8, Value.of_f64(seconds[i]), read_field)
    return b.build()


def gen_silent_call_args(iters: int, seed: int = 0) -> Trace:
    """Four loop-invariant arguments pushed to the same stack slots each call."""
    _check_positive("iters", iters)
    rng = np.random.default_rng(seed)
    stack_top = 0x7FFF00000000 + int(rng.integers(0, 2**16)) * 0x10
    slots = [stack_top - 8 * (k + 1) for k in range(4)]
    # pow(0.5, 23), pow(r23, 2), pow(2.0, 23), pow(t23, 2)
    args = [0.5, 0.5**23, 2.0, 2.0**23]
    contexts = []
    b = TraceBuilder()
    for k in range(4):
        contexts.append(
            b.context(k + 1, ("IS.randlc", 3 + k, "call"), ("Math.pow", 0, "vmovsd %xmm0,-0x8(%rsp)"))
        )
    for _ in range(iters):
        for k in range(4):
            b.store(slots[k], 8, Value.of_f64(args[k]), contexts[k])
    return b.build()


def generate(pattern: str, size: int, seed: int = 0) -> Trace:
    if pattern == "two-pass-scan":
        return gen_two_pass_scan(size, seed)
    if pattern == "dead-store-loop":
        return gen_dead_store_loop(size, seed)
    if pattern == "silent-call-args":
        return gen_silent_call_args(size, seed)
    raise ValueError(f"unknown pattern {pattern!r}; expected one of {', '.join(PATTERNS)}")

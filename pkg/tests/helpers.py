from __future__ import annotations

import numpy as np

from wastefinder.classifier import EqualityConfig, PairKind, classify_trap
from wastefinder.generators import TraceBuilder
from wastefinder.trace import AccessEvent, AccessKind, Trace, Value

S, L = AccessKind.STORE, AccessKind.LOAD

ACCEPTANCE_LINES: list[str] = []


def verdict(number: int, name: str, ok: bool, detail: str) -> bool:
    """Record and print one acceptance line; returns ``ok`` for the caller to assert."""
    line = f"criterion {number} {'PASS' if ok else 'FAIL'} {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def ev(kind, addr, width=8, value=5, ctx=0, seq=0, tid=0):
    v = value if isinstance(value, Value) else Value.of_int(value)
    return AccessEvent(tid, seq, kind, addr, width, v, ctx)


def t1_trace(epoch_after_first: bool = False) -> Trace:
    """S(100,8,5,A); S(100,8,5,B); L(100,8,5,C); L(100,8,5,D) with A..D = 1..4."""
    b = TraceBuilder()
    for cid, name in enumerate("ABCD", start=1):
        b.context(cid, ("main", 1, "call"), (f"site{name}", cid, "mov"))
    b.store(100, 8, Value.of_int(5), 1)
    if epoch_after_first:
        b.epoch()
    b.store(100, 8, Value.of_int(5), 2)
    b.load(100, 8, Value.of_int(5), 3)
    b.load(100, 8, Value.of_int(5), 4)
    return b.build()


def random_trace(
    rng: np.random.Generator,
    n_events: int = 200,
    threads: int = 2,
    ranges_per_thread: int = 8,
    epoch_prob: float = 0.0,
    n_contexts: int = 6,
    float_values: bool = True,
) -> Trace:
    """Interleaved multi-thread trace over a small pool of byte ranges per thread.

    Values come from a tiny pool so silent pairs are common; ranges overlap so
    partial-overlap traps occur.
    """
    b = TraceBuilder()
    for cid in range(n_contexts):
        b.context(cid, ("main", 1, "call"), (f"f{cid}", 10 + cid, f"ins{cid}"))
    pools = []
    for tid in range(threads):
        pool = set()
        while len(pool) < ranges_per_thread:
            width = int(rng.choice([1, 2, 4, 8]))
            addr = 0x1000 * (tid + 1) + int(rng.integers(0, 24))
            pool.add((addr, width))
        pools.append(sorted(pool))
    for _ in range(n_events):
        if epoch_prob and rng.random() < epoch_prob:
            b.epoch()
        tid = int(rng.integers(threads))
        addr, width = pools[tid][int(rng.integers(len(pools[tid])))]
        kind = S if rng.random() < 0.5 else L
        if float_values and width in (4, 8) and rng.random() < 0.3:
            x = float(rng.choice([0.0, 100.0, 100.5, 102.0]))
            value = Value.of_f64(x) if width == 8 else Value.of_f32(x)
        else:
            value = Value.of_int(int(rng.integers(0, 3)))
        b.access(kind, addr, width, value, int(rng.integers(n_contexts)), tid)
    return b.build()


def brute_force_pairs(trace: Trace, kind: PairKind, cfg: EqualityConfig = EqualityConfig()):
    """Quadratic reference: for every armed access scan forward for its trap.

    Returns a sorted list of (tid, armed_seq, trap_seq, armed_ctx, trap_ctx, wasteful, bytes).
    """
    out = []
    for tid, events in trace.by_thread.items():
        for i, (epoch, e) in enumerate(events):
            if e.kind is not kind.armed_kind:
                continue
            for epoch2, e2 in events[i + 1:]:
                if epoch2 != epoch:
                    break
                if not (e.address < e2.end and e2.address < e.end):
                    continue
                if kind is PairKind.SILENT_STORE and e2.kind is not S:
                    continue
                outcome = classify_trap(kind, e, e2, cfg)
                if outcome.completed:
                    out.append((tid, e.seq, e2.seq, e.context_id, e2.context_id,
                                outcome.wasteful, outcome.nbytes))
                break
    return sorted(out)


def record_tuples(records):
    return sorted((r.thread_id, r.armed_seq, r.trap_seq, r.armed_ctx, r.trap_ctx, r.wasteful, r.nbytes)
                  for r in records)


class ReplaceOldestBank:
    """Naive baseline: a new sample always evicts the longest-armed register."""

    def __init__(self, registers: int = 4):
        self.registers = registers
        self.slots: list = [None] * registers
        self._clock = 0

    def offer(self, candidate, trap_type):
        from wastefinder.watchpoints import Watchpoint

        self._clock += 1
        free = [i for i, wp in enumerate(self.slots) if wp is None]
        if free:
            slot = free[0]
        else:
            slot = min(range(self.registers), key=lambda i: self.slots[i].offers)
        wp = Watchpoint(candidate, trap_type)
        wp.offers = self._clock  # arming time
        self.slots[slot] = wp
        return slot

    def would_trap(self, event):
        return any(wp is not None and wp.trips(event) for wp in self.slots)

    def check_trap(self, event):
        hits = []
        for i, wp in enumerate(self.slots):
            if wp is not None and wp.trips(event):
                hits.append((i, wp))
                self.slots[i] = None
        return hits

    def disarm_all(self):
        n = sum(wp is not None for wp in self.slots)
        self.slots = [None] * self.registers
        return n

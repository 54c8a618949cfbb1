"""Exhaustive ground truth: every eligible access is treated as sampled.

With unlimited watchpoints each armed access waits for the next access in
its thread and epoch that touches its bytes and matches the watchpoint's
trap type. Pending episodes are indexed by byte address, so the cost is
linear in the number of events times the access width.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .classifier import EqualityConfig, PairKind, classify_trap
from .profile import PairRecord, Profile
from .trace import AccessEvent, Trace


@dataclass
class OracleResult:
    kind: PairKind
    pairs: list[PairRecord] = field(default_factory=list)

    @property
    def wasteful_bytes(self) -> int:
        return sum(r.nbytes for r in self.pairs if r.wasteful)

    @property
    def denominator_bytes(self) -> int:
        return sum(r.nbytes for r in self.pairs)

    @property
    def fraction(self) -> float:
        d = self.denominator_bytes
        return self.wasteful_bytes / d if d else 0.0

    def to_profile(self) -> Profile:
        return Profile.from_records(self.kind, self.pairs)


def _thread_episodes(events, kind: PairKind, cfg: EqualityConfig) -> list[PairRecord]:
    trap_type = kind.trap_type
    pending: dict[int, AccessEvent] = {}  # serial -> armed event
    by_byte: dict[int, set[int]] = {}
    out: list[PairRecord] = []
    current_epoch = None
    serial = 0

    for epoch, ev in events:
        if epoch != current_epoch:
            pending.clear()
            by_byte.clear()
            current_epoch = epoch

        if trap_type.fires_on(ev.kind):
            hit: set[int] = set()
            for b in range(ev.address, ev.end):
                hit.update(by_byte.get(b, ()))
            for s in sorted(hit):
                armed = pending.pop(s)
                for b in range(armed.address, armed.end):
                    ids = by_byte[b]
                    ids.discard(s)
                    if not ids:
                        del by_byte[b]
                outcome = classify_trap(kind, armed, ev, cfg)
                if outcome.completed:
                    out.append(PairRecord(ev.thread_id, kind, armed.context_id, ev.context_id,
                                          outcome.wasteful, outcome.nbytes, armed.seq, ev.seq))

        if ev.kind is kind.armed_kind:
            pending[serial] = ev
            for b in range(ev.address, ev.end):
                by_byte.setdefault(b, set()).add(serial)
            serial += 1
    return out


def detect_exact(trace: Trace, kind: PairKind, cfg: EqualityConfig = EqualityConfig()) -> OracleResult:
    pairs: list[PairRecord] = []
    for _tid, events in trace.by_thread.items():
        pairs.extend(_thread_episodes(events, kind, cfg))
    return OracleResult(kind, pairs)

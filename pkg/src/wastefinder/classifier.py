"""Value-equality and watchpoint-episode classification rules.

Both the exhaustive oracle and the sampled detector classify through
:func:`classify_trap`, so they agree on what any single episode means.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .trace import AccessEvent, AccessKind, Value, ValueTag


class TrapType(str, Enum):
    ON_STORE = "trap-on-store"
    ON_ACCESS = "trap-on-access"

    def fires_on(self, kind: AccessKind) -> bool:
        return self is TrapType.ON_ACCESS or kind is AccessKind.STORE


class PairKind(str, Enum):
    DEAD_STORE = "dead-store"
    SILENT_STORE = "silent-store"
    SILENT_LOAD = "silent-load"

    @property
    def armed_kind(self) -> AccessKind:
        """Access kind the PMU subscribes to (and that arms watchpoints)."""
        return AccessKind.LOAD if self is PairKind.SILENT_LOAD else AccessKind.STORE

    @property
    def trap_type(self) -> TrapType:
        # x86 has no trap-only-on-load, so silent loads watch all accesses
        return TrapType.ON_STORE if self is PairKind.SILENT_STORE else TrapType.ON_ACCESS


@dataclass(frozen=True)
class EqualityConfig:
    fp_threshold: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.fp_threshold < 1.0:
            raise ValueError(f"fp_threshold must be in [0, 1), got {self.fp_threshold}")


class Verdict(str, Enum):
    WASTEFUL = "wasteful"
    NOT_WASTEFUL = "not-wasteful"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EpisodeOutcome:
    verdict: Verdict
    nbytes: int = 0

    def __post_init__(self):
        if self.verdict is Verdict.INCONCLUSIVE:
            assert self.nbytes == 0
        else:
            assert self.nbytes > 0

    @property
    def wasteful(self) -> bool:
        return self.verdict is Verdict.WASTEFUL

    @property
    def completed(self) -> bool:
        return self.verdict is not Verdict.INCONCLUSIVE


INCONCLUSIVE = EpisodeOutcome(Verdict.INCONCLUSIVE)


def values_equal(v1: Value, v2: Value, cfg: EqualityConfig = EqualityConfig()) -> bool:
    """Exact for integers, relative-threshold for floats of the same tag."""
    if v1.tag is not v2.tag:
        return False
    if v1.tag is ValueTag.INT:
        return v1.payload == v2.payload
    a, b = float(v1.payload), float(v2.payload)
    if math.isnan(a) or math.isnan(b):
        return False
    if a == 0.0 and b == 0.0:
        return True
    return abs(a - b) <= cfg.fp_threshold * max(abs(a), abs(b))


def overlap_bytes(a: AccessEvent, b: AccessEvent) -> int:
    return max(0, min(a.end, b.end) - max(a.address, b.address))


def _same_location(a: AccessEvent, b: AccessEvent) -> bool:
    return a.address == b.address and a.width == b.width


def classify_trap(
    kind: PairKind, armed: AccessEvent, trap: AccessEvent, cfg: EqualityConfig = EqualityConfig()
) -> EpisodeOutcome:
    """Outcome of the episode armed at ``armed`` and ended by ``trap``.

    ``trap.value`` is the value after the trapping access executed.
    """
    assert armed.thread_id == trap.thread_id, "cross-thread episode"
    assert trap.seq > armed.seq, "trap must follow the armed access"
    assert armed.overlaps(trap), "trap does not touch the watched bytes"
    assert armed.kind is kind.armed_kind, f"{kind.value} watchpoints are armed on {kind.armed_kind.name}"

    if kind is PairKind.DEAD_STORE:
        if trap.is_store:
            return EpisodeOutcome(Verdict.WASTEFUL, overlap_bytes(armed, trap))
        return EpisodeOutcome(Verdict.NOT_WASTEFUL, armed.width)

    if kind is PairKind.SILENT_STORE:
        assert trap.is_store, "silent-store watchpoints trap only on stores"
    elif trap.is_store:
        return INCONCLUSIVE

    if _same_location(armed, trap) and values_equal(armed.value, trap.value, cfg):
        return EpisodeOutcome(Verdict.WASTEFUL, armed.width)
    return EpisodeOutcome(Verdict.NOT_WASTEFUL, armed.width)

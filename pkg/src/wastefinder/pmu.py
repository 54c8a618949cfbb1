"""Per-thread PMU overflow simulation with a fixed period and zero skid."""
from __future__ import annotations

from dataclasses import dataclass

from .trace import AccessEvent, AccessKind

DEFAULT_PERIOD = 5_000_000


@dataclass(frozen=True)
class SamplerConfig:
    period: int = DEFAULT_PERIOD
    subscribed_kind: AccessKind = AccessKind.STORE
    phase: int = 0

    def __post_init__(self):
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")
        if not 0 <= self.phase < self.period:
            raise ValueError(f"phase must be in [0, period), got {self.phase}")


class PmuSampler:
    """Counts subscribed events per thread; the overflowing event is the sample.

    Counters start at ``phase``, so the first sample in a thread lands on its
    ``(period - phase)``-th subscribed event.
    """

    def __init__(self, cfg: SamplerConfig):
        self.cfg = cfg
        self.counters: dict[int, int] = {}

    def counter(self, thread_id: int) -> int:
        return self.counters.get(thread_id, self.cfg.phase)

    def would_fire(self, event: AccessEvent) -> bool:
        return event.kind is self.cfg.subscribed_kind and self.counter(event.thread_id) + 1 == self.cfg.period

    def observe(self, event: AccessEvent) -> bool:
        if event.kind is not self.cfg.subscribed_kind:
            return False
        c = self.counter(event.thread_id) + 1
        if c == self.cfg.period:
            self.counters[event.thread_id] = 0
            return True
        self.counters[event.thread_id] = c
        return False

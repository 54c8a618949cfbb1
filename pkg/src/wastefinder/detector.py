"""Sampling pipeline: PMU sample -> arm watchpoint -> trap -> classify -> record."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

from .classifier import EqualityConfig, PairKind, TrapType, classify_trap
from .pmu import DEFAULT_PERIOD, PmuSampler, SamplerConfig
from .profile import PairRecord, Profile, merge
from .trace import AccessEvent, Trace
from .watchpoints import DEFAULT_REGISTERS, WatchpointBank, thread_rng


class Bank(Protocol):
    def offer(self, candidate: AccessEvent, trap_type: TrapType): ...
    def would_trap(self, event: AccessEvent) -> bool: ...
    def check_trap(self, event: AccessEvent) -> list: ...
    def disarm_all(self) -> int: ...


BankFactory = Callable[[int], Bank]


@dataclass(frozen=True)
class DetectorConfig:
    kind: PairKind
    period: int = DEFAULT_PERIOD
    phase: int = 0
    registers: int = DEFAULT_REGISTERS
    seed: int = 0
    equality: EqualityConfig = field(default_factory=EqualityConfig)

    @property
    def sampler(self) -> SamplerConfig:
        return SamplerConfig(self.period, self.kind.armed_kind, self.phase)

    @property
    def trap_type(self) -> TrapType:
        return self.kind.trap_type


def default_bank_factory(cfg: DetectorConfig) -> BankFactory:
    return lambda tid: WatchpointBank(cfg.registers, thread_rng(cfg.seed, tid))


def run_thread(
    events: list[tuple[int, AccessEvent]],
    cfg: DetectorConfig,
    bank: Bank,
) -> list[PairRecord]:
    """Run one thread's ``(epoch, event)`` stream; returns completed episodes."""
    kind, eq, trap_type = cfg.kind, cfg.equality, cfg.trap_type
    sampler = PmuSampler(cfg.sampler)
    records: list[PairRecord] = []
    seen_epoch = events[0][0] if events else 0

    for epoch, ev in events:
        if epoch != seen_epoch and (sampler.would_fire(ev) or bank.would_trap(ev)):
            # stale watchpoints go lazily, at the first sample or trap of the epoch
            bank.disarm_all()
            seen_epoch = epoch

        for _slot, wp in bank.check_trap(ev):
            armed = wp.armed_event
            outcome = classify_trap(kind, armed, ev, eq)
            if outcome.completed:
                records.append(PairRecord(ev.thread_id, kind, armed.context_id, ev.context_id,
                                          outcome.wasteful, outcome.nbytes, armed.seq, ev.seq))

        if sampler.observe(ev):
            bank.offer(ev, trap_type)
    return records


def run_sampled_records(
    trace: Trace, cfg: DetectorConfig, bank_factory: Optional[BankFactory] = None
) -> dict[int, list[PairRecord]]:
    factory = bank_factory or default_bank_factory(cfg)
    return {tid: run_thread(evs, cfg, factory(tid)) for tid, evs in trace.by_thread.items()}


def run_sampled_per_thread(
    trace: Trace, cfg: DetectorConfig, bank_factory: Optional[BankFactory] = None
) -> dict[int, Profile]:
    per_thread = run_sampled_records(trace, cfg, bank_factory)
    return {tid: Profile.from_records(cfg.kind, recs, thread_id=tid) for tid, recs in per_thread.items()}


def run_sampled(
    trace: Trace, cfg: DetectorConfig, bank_factory: Optional[BankFactory] = None
) -> Profile:
    """Per-thread pipelines, merged post-mortem into one profile."""
    return merge(list(run_sampled_per_thread(trace, cfg, bank_factory).values()), kind=cfg.kind)

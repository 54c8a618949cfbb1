"""Simulated debug registers managed by reservoir sampling.

Each armed register keeps ``offers``: how many PMU samples the thread has
delivered since that register was last free, counting the one that armed
it. The next sample replaces it with probability ``1 / (offers + 1)``, so
the i-th sample since the register was free wins with probability 1/i.
Only a trap or a full disarm frees a register; being replaced does not
restart its count.

The replacement decision is written over a leading batch axis so that the
same code drives one bank and a Monte Carlo over many independent banks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .classifier import TrapType
from .trace import AccessEvent

DEFAULT_REGISTERS = 4
MAX_REGISTERS = 16


def choose_victims(offers: np.ndarray, order: np.ndarray, draws: np.ndarray) -> np.ndarray:
    """Select the register a new sample replaces in each full bank.

    ``offers``, ``order`` and ``draws`` have shape ``(..., N)``. Registers are
    visited in ``order``; the visit at position k succeeds when
    ``draws[..., k] < 1 / (offers[visited] + 1)``. The first success wins.
    Returns slot indices with shape ``(...)``, -1 where every attempt failed.
    """
    visited = np.take_along_axis(offers, order, axis=-1)
    success = draws * (visited + 1) < 1.0
    first = np.argmax(success, axis=-1)
    slot = np.take_along_axis(order, first[..., None], axis=-1)[..., 0]
    return np.where(success.any(axis=-1), slot, -1)


@dataclass(slots=True)
class Watchpoint:
    armed_event: AccessEvent
    trap_type: TrapType
    offers: int = 1
    start: int = field(init=False)
    end: int = field(init=False)

    def __post_init__(self):
        self.start = self.armed_event.address
        self.end = self.armed_event.address + self.armed_event.width

    def trips(self, event: AccessEvent) -> bool:
        return (self.start < event.address + event.width and event.address < self.end
                and self.trap_type.fires_on(event.kind))


class ArmStatus(str, Enum):
    ARMED_FREE = "armed-free"
    REPLACED = "replaced"
    REJECTED = "rejected"


@dataclass(frozen=True)
class ArmResult:
    status: ArmStatus
    slot: Optional[int] = None


def thread_rng(seed: int, thread_id: int) -> np.random.Generator:
    """Independent, reproducible stream per ``(seed, thread)``."""
    return np.random.default_rng([seed, thread_id])


class WatchpointBank:
    """The debug registers of one thread."""

    def __init__(self, registers: int = DEFAULT_REGISTERS, rng: Optional[np.random.Generator] = None):
        if not 1 <= registers <= MAX_REGISTERS:
            raise ValueError(f"registers must be in 1..{MAX_REGISTERS}, got {registers}")
        self.registers = registers
        self.slots: list[Optional[Watchpoint]] = [None] * registers
        self.rng = rng if rng is not None else np.random.default_rng()

    @property
    def armed_count(self) -> int:
        return sum(wp is not None for wp in self.slots)

    def offer(self, candidate: AccessEvent, trap_type: TrapType) -> ArmResult:
        slots = self.slots
        for i, wp in enumerate(slots):
            if wp is None:
                for other in slots:
                    if other is not None:
                        other.offers += 1
                slots[i] = Watchpoint(candidate, trap_type)
                return ArmResult(ArmStatus.ARMED_FREE, i)

        n = self.registers
        offers = np.fromiter((wp.offers for wp in slots), dtype=np.int64, count=n)
        order = self.rng.permutation(n)
        draws = self.rng.random(n)
        victim = int(choose_victims(offers, order, draws))
        for wp in slots:
            wp.offers += 1
        if victim < 0:
            return ArmResult(ArmStatus.REJECTED)
        # replacement is not a free register: the count keeps running
        slots[victim] = Watchpoint(candidate, trap_type, slots[victim].offers)
        return ArmResult(ArmStatus.REPLACED, victim)

    def would_trap(self, event: AccessEvent) -> bool:
        return any(wp is not None and wp.trips(event) for wp in self.slots)

    def check_trap(self, event: AccessEvent) -> list[tuple[int, Watchpoint]]:
        """Disarm and return, in slot order, every register the access trips."""
        hits = []
        slots = self.slots
        lo, hi = event.address, event.address + event.width
        for i in range(self.registers):
            wp = slots[i]
            if wp is not None and wp.start < hi and lo < wp.end and wp.trap_type.fires_on(event.kind):
                hits.append((i, wp))
                slots[i] = None
        return hits

    def disarm_all(self) -> int:
        n = self.armed_count
        self.slots = [None] * self.registers
        return n


def simulate_survivors(n_offers: int, registers: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo of ``trials`` banks fed ``n_offers`` samples and no traps.

    Returns, for each offer index, the number of trials in which that
    candidate is still armed after the last offer.
    """
    if n_offers < registers:
        raise ValueError("need at least as many offers as registers")
    # the first `registers` offers land in free slots
    owners = np.tile(np.arange(registers), (trials, 1))
    offers = np.tile(np.arange(registers, 0, -1, dtype=np.int64), (trials, 1))
    rows = np.arange(trials)
    for k in range(registers, n_offers):
        if registers == 1:
            order = np.zeros((trials, 1), dtype=np.int64)
        else:
            order = np.argsort(rng.random((trials, registers)), axis=1)
        victims = choose_victims(offers, order, rng.random((trials, registers)))
        hit = victims >= 0
        owners[rows[hit], victims[hit]] = k
        offers += 1
    return np.bincount(owners.ravel(), minlength=n_offers)


def exact_survival(n_offers: int, registers: int) -> np.ndarray:
    """Exact survival probability of each offer, by enumerating the policy.

    Exponential in ``registers`` (visit orders), linear in the number of
    reachable bank states per step; intended for small cases.
    """
    from itertools import permutations

    # state: tuple of (owner, offers) per slot -> probability
    states = {tuple((i, registers - i) for i in range(registers)): 1.0}
    orders = list(permutations(range(registers)))
    for k in range(registers, n_offers):
        nxt: dict[tuple, float] = {}
        for state, p in states.items():
            for order in orders:
                remaining = 1.0
                for slot in order:
                    win = 1.0 / (state[slot][1] + 1)
                    q = p * remaining * win / len(orders)
                    new = tuple((k if i == slot else o, c + 1) for i, (o, c) in enumerate(state))
                    nxt[new] = nxt.get(new, 0.0) + q
                    remaining *= 1.0 - win
                new = tuple((o, c + 1) for o, c in state)
                nxt[new] = nxt.get(new, 0.0) + p * remaining / len(orders)
        states = nxt
    survival = np.zeros(n_offers)
    for state, p in states.items():
        for owner, _ in state:
            survival[owner] += p
    return survival

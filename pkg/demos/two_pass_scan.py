"""Two passes over an array: replace-oldest misses every silent load, the reservoir does not.

Pass 1 loads every element, pass 2 loads them again in the same order. With
a sampling period of 1000 there are ten pass-1 samples for four registers.
Replace-oldest evicts pass-1 watchpoints as soon as pass-2 samples arrive,
before pass 2 reaches those addresses.
"""
from wastefinder.classifier import PairKind
from wastefinder.detector import DetectorConfig, run_sampled
from wastefinder.generators import gen_two_pass_scan
from wastefinder.watchpoints import Watchpoint

trace = gen_two_pass_scan(10_000, seed=0)
cfg = DetectorConfig(PairKind.SILENT_LOAD, period=1000, registers=4)


class ReplaceOldest:
    def __init__(self, n=4):
        self.slots, self.clock = [None] * n, 0

    def offer(self, event, trap_type):
        self.clock += 1
        free = [i for i, w in enumerate(self.slots) if w is None]
        slot = free[0] if free else min(range(len(self.slots)), key=lambda i: self.slots[i].offers)
        self.slots[slot] = Watchpoint(event, trap_type, self.clock)

    def would_trap(self, event):
        return any(w is not None and w.trips(event) for w in self.slots)

    def check_trap(self, event):
        hits = [(i, w) for i, w in enumerate(self.slots) if w is not None and w.trips(event)]
        for i, _ in hits:
            self.slots[i] = None
        return hits

    def disarm_all(self):
        n = sum(w is not None for w in self.slots)
        self.slots = [None] * len(self.slots)
        return n


naive = run_sampled(trace, cfg, bank_factory=lambda tid: ReplaceOldest())
print(f"replace-oldest: {sum(s.pair_count for s in naive.pairs.values())} pairs")

found = 0
for seed in range(100):
    prof = run_sampled(trace, DetectorConfig(cfg.kind, cfg.period, registers=4, seed=seed))
    found += bool(prof.pairs)
print(f"reservoir: pairs found in {found} of 100 seeds")

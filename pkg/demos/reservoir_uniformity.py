"""Why the watchpoint replacement policy matters.

A single register sees 1000 candidate samples. Under the reservoir rule the
survivor is uniform over arrival order; always replacing keeps only the last
one. The script prints survival frequencies in ten arrival-order buckets.
"""
import numpy as np

from wastefinder.watchpoints import exact_survival, simulate_survivors

M, TRIALS = 1000, 100_000

counts = simulate_survivors(M, 1, TRIALS, np.random.default_rng(0))
buckets = counts.reshape(10, -1).sum(axis=1) / TRIALS
print("reservoir, share of survivors per 100 arrivals:")
print("  " + " ".join(f"{x:.3f}" for x in buckets))
print("replace-always: arrival 1000 survives every time")

# with more registers, the first few arrivals get a head start from free arming
p = exact_survival(12, 4)
print("\n4 registers, 12 candidates, exact survival by arrival:")
print("  " + " ".join(f"{x:.3f}" for x in p))
print(f"  total {p.sum():.3f} (= registers), late arrivals near {4 / 12:.3f}")

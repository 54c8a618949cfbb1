"""Repeat sampled detection over seeds and compare the 95% interval with the exact fraction.

The sampler is deterministic for a given period and phase, and on this loop
the registers never fill, so the seed alone changes nothing. Drawing the
phase per run is what makes the runs differ. `wastefinder bench` varies the
seed only.
"""
import numpy as np

from wastefinder.classifier import PairKind
from wastefinder.detector import DetectorConfig, run_sampled
from wastefinder.generators import gen_dead_store_loop
from wastefinder.oracle import detect_exact
from wastefinder.profile import compute_metrics, confidence_interval

trace = gen_dead_store_loop(2000, seed=1)
exact = detect_exact(trace, PairKind.DEAD_STORE).fraction

rng = np.random.default_rng(7)
for period in (3, 17, 101):
    phases = rng.integers(0, period, size=30)
    fr = [compute_metrics(run_sampled(trace, DetectorConfig(PairKind.DEAD_STORE, period=period,
                                                            phase=int(ph), seed=s))).program_fraction
          for s, ph in enumerate(phases)]
    mean, half = confidence_interval(fr)
    inside = "yes" if mean - half <= exact <= mean + half else "no"
    print(f"period {period:>4}: {mean:.3f} +/- {half:.3f}  exact {exact:.3f}  contains: {inside}")

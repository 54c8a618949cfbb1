"""Build a tiny trace by hand, run the exact oracle and the sampled detector, print a report.

Run: python3 demos/detect_walkthrough.py
"""
from wastefinder.classifier import PairKind
from wastefinder.detector import DetectorConfig, run_sampled
from wastefinder.generators import TraceBuilder
from wastefinder.oracle import detect_exact
from wastefinder.profile import compute_metrics
from wastefinder.report import render_text
from wastefinder.trace import Value

b = TraceBuilder()
b.context(1, ("main", 10, "call"), ("init", 3, "mov [rbp-8], rax"))
b.context(2, ("main", 11, "call"), ("reset", 7, "mov [rbp-8], rax"))
b.context(3, ("main", 12, "call"), ("use", 2, "mov rax, [rbp-8]"))

# init and reset write the same value to one field, then use reads it
b.store(0x7F00, 8, Value.of_int(0), 1)
b.store(0x7F00, 8, Value.of_int(0), 2)
b.load(0x7F00, 8, Value.of_int(0), 3)
trace = b.build()

for kind in PairKind:
    exact = detect_exact(trace, kind)
    print(f"{kind.value:>12}: exact fraction {exact.fraction:.2f} over {exact.denominator_bytes} bytes")

# sampling every store with one register finds the same silent store
profile = run_sampled(trace, DetectorConfig(PairKind.SILENT_STORE, period=1, registers=1))
print()
print(render_text(compute_metrics(profile), trace.contexts))

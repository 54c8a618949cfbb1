"""Acceptance criteria, one test each, each printing a single PASS/FAIL line."""
import time

import numpy as np
import pytest

from helpers import ReplaceOldestBank, random_trace, record_tuples, t1_trace, verdict
from wastefinder.classifier import PairKind, values_equal
from wastefinder.cli import main
from wastefinder.detector import DetectorConfig, run_sampled, run_sampled_per_thread, run_sampled_records
from wastefinder.generators import gen_two_pass_scan
from wastefinder.oracle import detect_exact
from wastefinder.profile import compute_metrics, confidence_interval, merge
from wastefinder.trace import Value
from wastefinder.watchpoints import simulate_survivors

DS, SS, SL = PairKind.DEAD_STORE, PairKind.SILENT_STORE, PairKind.SILENT_LOAD


def test_c1_oracle_equivalence():
    start = time.perf_counter()
    mismatches = []
    for i in range(200):
        rng = np.random.default_rng(1000 + i)
        trace = random_trace(rng, n_events=int(rng.integers(1, 501)), threads=2, ranges_per_thread=8)
        for kind in PairKind:
            sampled = run_sampled_records(trace, DetectorConfig(kind, period=1, registers=8, seed=i))
            flat = [r for rs in sampled.values() for r in rs]
            exact = detect_exact(trace, kind)
            same_pairs = record_tuples(flat) == record_tuples(exact.pairs)
            frac = compute_metrics(merge(list(run_sampled_per_thread(trace, DetectorConfig(
                kind, period=1, registers=8, seed=i)).values()), kind)).program_fraction
            if not same_pairs or frac != exact.fraction:
                mismatches.append((i, kind.value))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 10
    assert verdict(1, "oracle equivalence", ok, f"{len(mismatches)} mismatches over 600 runs in {elapsed:.1f}s")


def test_c2_estimator_consistency():
    start = time.perf_counter()
    trace = gen_two_pass_scan(10_000, seed=0)
    oracle = detect_exact(trace, SL).fraction
    fractions = [compute_metrics(run_sampled(trace, DetectorConfig(SL, period=97, registers=4, seed=s)))
                 .program_fraction for s in range(30)]
    mean, half = confidence_interval(fractions)
    elapsed = time.perf_counter() - start
    ok = mean - half <= oracle <= mean + half and elapsed < 30
    assert verdict(2, "estimator consistency", ok,
                   f"CI [{mean - half:.4f}, {mean + half:.4f}] vs oracle {oracle} in {elapsed:.1f}s")


def test_c3_reservoir_uniformity():
    m, trials = 1000, 100_000
    start = time.perf_counter()
    counts = simulate_survivors(m, 1, trials, np.random.default_rng(0))
    elapsed = time.perf_counter() - start
    p = 1 / m
    bound = 3 * np.sqrt(trials * p * (1 - p))
    outside = int(np.sum(np.abs(counts - trials * p) > bound))
    chi2 = float(np.sum((counts - trials * p) ** 2 / (trials * p)))
    ok = outside == 0 and elapsed < 60
    assert verdict(3, "reservoir uniformity", ok,
                   f"{outside} of {m} offers outside 3 sigma (chi2 {chi2:.0f} on {m - 1} dof) in {elapsed:.1f}s")


SCAN_PERIOD = 1000  # ten pass-1 samples against four registers


def test_c4_two_pass_scan_recovery():
    trace = gen_two_pass_scan(10_000, seed=0)
    naive = run_sampled(trace, DetectorConfig(SL, period=SCAN_PERIOD, registers=4),
                        bank_factory=lambda tid: ReplaceOldestBank(4))
    naive_pairs = sum(s.pair_count for s in naive.pairs.values())
    seeds = 1000
    hits = 0
    for s in range(seeds):
        prof = run_sampled(trace, DetectorConfig(SL, period=SCAN_PERIOD, registers=4, seed=s))
        hits += sum(st.pair_count for st in prof.pairs.values()) > 0
    ok = naive_pairs == 0 and hits >= 0.95 * seeds
    assert verdict(4, "two-pass scan recovery", ok,
                   f"naive {naive_pairs} pairs; reservoir > 0 pairs in {hits}/{seeds} seeds")


def test_c5_epoch_correctness():
    straddling = checked = 0
    for i in range(150):
        rng = np.random.default_rng(5000 + i)
        trace = random_trace(rng, n_events=300, threads=2, epoch_prob=0.04)
        epoch = {(e.thread_id, e.seq): ep for ep, e in trace.tagged_events()}
        for kind in PairKind:
            cfg = DetectorConfig(kind, period=int(rng.integers(1, 4)), registers=int(rng.integers(1, 5)), seed=i)
            records = [r for rs in run_sampled_records(trace, cfg).values() for r in rs]
            records += detect_exact(trace, kind).pairs
            for r in records:
                checked += 1
                straddling += epoch[(r.thread_id, r.armed_seq)] != epoch[(r.thread_id, r.trap_seq)]
    assert verdict(5, "epoch correctness", straddling == 0 and checked > 0,
                   f"{straddling} straddling pairs among {checked} emitted")


def test_c6_definition_fixtures():
    trace = t1_trace()
    got = {k: detect_exact(trace, k).fraction for k in PairKind}
    sampled = {k: compute_metrics(run_sampled(trace, DetectorConfig(k, period=1, registers=8))).program_fraction
               for k in PairKind}
    want = {DS: 0.5, SS: 1.0, SL: 1.0}
    fp = (values_equal(Value.of_f64(100.0), Value.of_f64(100.9)),
          values_equal(Value.of_f64(100.0), Value.of_f64(101.1)))
    ok = got == want and sampled == want and fp == (True, False)
    detail = ", ".join(f"{k.value} {got[k]}" for k in PairKind) + f"; 100.9 silent {fp[0]}, 101.1 silent {fp[1]}"
    assert verdict(6, "definition fixtures", ok, detail)


def _cli_outputs(workdir, tag, capsys):
    trace = workdir / "scan.jsonl"
    outs = {}
    main(["gen", "two-pass-scan", "--n", "2000", "--seed", "4", "-o", str(trace)])
    outs["gen"] = trace.read_bytes()
    p, r = workdir / f"{tag}.profile.json", workdir / f"{tag}.report.txt"
    main(["detect", "--mode", "silent-load", "--trace", str(trace), "--period", "31", "--seed", "2",
          "--profile-out", str(p), "--report-out", str(r)])
    outs["detect"] = p.read_bytes() + r.read_bytes()
    main(["detect", "--mode", "dead-store", "--trace", str(trace), "--exact",
          "--profile-out", str(p), "--report-out", str(r)])
    outs["detect-exact"] = p.read_bytes() + r.read_bytes()
    rep = workdir / f"{tag}.json"
    main(["report", "--profile", str(p), "--trace", str(trace), "--json", "-o", str(rep)])
    outs["report"] = rep.read_bytes()
    m = workdir / f"{tag}.merged.json"
    main(["merge", str(p), str(p), "-o", str(m)])
    outs["merge"] = m.read_bytes()
    b = workdir / f"{tag}.bench.txt"
    main(["bench", "--mode", "silent-load", "--trace", str(trace), "--period", "31", "--runs", "3", "-o", str(b)])
    outs["bench"] = b.read_bytes()
    capsys.readouterr()
    return outs


def test_c7_cli_determinism(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("WASTEFINDER_THREADS", "1")
    first = _cli_outputs(tmp_path, "run", capsys)
    second = _cli_outputs(tmp_path, "run", capsys)
    differing = [k for k in first if first[k] != second[k]]
    assert verdict(7, "cli determinism", not differing,
                   f"{len(first)} invocations compared, differing: {differing or 'none'}")


def test_c8_merge_correctness():
    bad = 0
    for i in range(100):
        rng = np.random.default_rng(8000 + i)
        trace = random_trace(rng, n_events=400, threads=int(rng.integers(2, 5)))
        kind = list(PairKind)[i % 3]
        cfg = DetectorConfig(kind, period=int(rng.integers(1, 4)), registers=int(rng.integers(1, 5)), seed=i)
        merged = compute_metrics(merge(list(run_sampled_per_thread(trace, cfg).values()), kind))
        records = [r for rs in run_sampled_records(trace, cfg).values() for r in rs]
        wasteful = sum(r.nbytes for r in records if r.wasteful)
        total = sum(r.nbytes for r in records)
        pooled = wasteful / total if total else 0.0
        bad += (merged.program_fraction, merged.wasteful_bytes, merged.total_bytes) != (pooled, wasteful, total)
    assert verdict(8, "merge correctness", bad == 0, f"{bad} of 100 traces disagree with pooled counters")

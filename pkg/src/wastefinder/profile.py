"""Calling-context-pair profiles, waste metrics and run statistics."""
from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

from .classifier import PairKind

U64_MAX = 2**64 - 1

PairKey = tuple[int, int]


@dataclass(frozen=True)
class PairRecord:
    """One completed watchpoint episode attributed to ``<armed_ctx, trap_ctx>``."""

    thread_id: int
    kind: PairKind
    armed_ctx: int
    trap_ctx: int
    wasteful: bool
    nbytes: int
    armed_seq: int
    trap_seq: int

    @property
    def key(self) -> PairKey:
        return (self.armed_ctx, self.trap_ctx)


def _checked_add(a: int, b: int) -> int:
    s = a + b
    if s > U64_MAX:
        raise OverflowError("byte counter exceeds 64 bits")
    return s


@dataclass
class PairStats:
    wasteful_bytes: int = 0
    total_bytes: int = 0
    pair_count: int = 0

    def add(self, other: "PairStats"):
        self.wasteful_bytes = _checked_add(self.wasteful_bytes, other.wasteful_bytes)
        self.total_bytes = _checked_add(self.total_bytes, other.total_bytes)
        self.pair_count = _checked_add(self.pair_count, other.pair_count)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.wasteful_bytes, self.total_bytes, self.pair_count)


MERGED = None


@dataclass
class Profile:
    """Per-thread (``thread_id`` set) or merged (``thread_id is None``) pair table."""

    kind: Optional[PairKind]
    pairs: dict[PairKey, PairStats] = field(default_factory=dict)
    thread_id: Optional[int] = MERGED

    @classmethod
    def from_records(cls, kind: PairKind, records: Iterable[PairRecord], thread_id=MERGED) -> "Profile":
        prof = cls(kind, thread_id=thread_id)
        for r in records:
            prof.add_record(r)
        return prof

    def add_record(self, r: PairRecord):
        assert r.kind is self.kind
        stats = self.pairs.setdefault(r.key, PairStats())
        stats.add(PairStats(r.nbytes if r.wasteful else 0, r.nbytes, 1))

    @property
    def wasteful_bytes(self) -> int:
        return sum(s.wasteful_bytes for s in self.pairs.values())

    @property
    def total_bytes(self) -> int:
        return sum(s.total_bytes for s in self.pairs.values())

    def table(self) -> dict[PairKey, tuple[int, int, int]]:
        """Plain-tuple view, convenient for equality checks."""
        return {k: v.as_tuple() for k, v in sorted(self.pairs.items())}


def merge(profiles: Sequence[Profile], kind: Optional[PairKind] = None) -> Profile:
    """Coalesce profiles whose pairs share the same ``<armed_ctx, trap_ctx>``."""
    kinds = {p.kind for p in profiles if p.kind is not None}
    if kind is not None:
        kinds.add(kind)
    if len(kinds) > 1:
        raise ValueError(f"cannot merge profiles of different kinds: {sorted(k.value for k in kinds)}")
    out = Profile(kinds.pop() if kinds else None)
    for p in profiles:
        for key, stats in p.pairs.items():
            out.pairs.setdefault(key, PairStats()).add(stats)
    out.pairs = dict(sorted(out.pairs.items()))
    return out


@dataclass(frozen=True)
class RankedPair:
    armed_ctx: int
    trap_ctx: int
    wasteful_bytes: int
    total_bytes: int
    pair_count: int
    pair_fraction: float

    @property
    def key(self) -> PairKey:
        return (self.armed_ctx, self.trap_ctx)


@dataclass(frozen=True)
class MetricSummary:
    kind: Optional[PairKind]
    program_fraction: float
    wasteful_bytes: int
    total_bytes: int
    ranked_pairs: tuple[RankedPair, ...]


def compute_metrics(p: Profile) -> MetricSummary:
    """Program-wide waste fraction and per-pair fractions over a shared denominator."""
    wasteful, total = p.wasteful_bytes, p.total_bytes
    ranked = sorted(p.pairs.items(), key=lambda kv: (-kv[1].wasteful_bytes, kv[0]))
    pairs = tuple(
        RankedPair(a, t, s.wasteful_bytes, s.total_bytes, s.pair_count,
                   s.wasteful_bytes / total if total else 0.0)
        for (a, t), s in ranked
    )
    return MetricSummary(p.kind, wasteful / total if total else 0.0, wasteful, total, pairs)


def summary_to_profile(summary: MetricSummary) -> Profile:
    prof = Profile(summary.kind)
    for rp in sorted(summary.ranked_pairs, key=lambda r: r.key):
        prof.pairs[rp.key] = PairStats(rp.wasteful_bytes, rp.total_bytes, rp.pair_count)
    return prof


def confidence_interval(samples: Sequence[float], z: float = 1.96) -> tuple[float, float]:
    """``(mean, z * s / sqrt(n))`` using the sample standard deviation."""
    n = len(samples)
    if n < 2:
        raise ValueError("confidence interval needs at least two samples")
    mean = statistics.fmean(samples)
    return mean, z * statistics.stdev(samples) / math.sqrt(n)


# ---------------------------------------------------------------------------
# serialization


def profile_to_dict(p: Profile, manifest: Optional[dict] = None) -> dict[str, Any]:
    d: dict[str, Any] = {}
    if manifest is not None:
        d["manifest"] = manifest
    d["kind"] = p.kind.value if p.kind is not None else None
    d["thread"] = "merged" if p.thread_id is None else p.thread_id
    d["wasteful_bytes"] = p.wasteful_bytes
    d["total_bytes"] = p.total_bytes
    d["pairs"] = [
        {"armed_ctx": a, "trap_ctx": t, "wasteful_bytes": s.wasteful_bytes,
         "total_bytes": s.total_bytes, "pair_count": s.pair_count}
        for (a, t), s in sorted(p.pairs.items())
    ]
    return d


def dumps_profile(p: Profile, manifest: Optional[dict] = None) -> str:
    return json.dumps(profile_to_dict(p, manifest), indent=2) + "\n"


def profile_from_dict(d: dict[str, Any]) -> Profile:
    try:
        kind = PairKind(d["kind"]) if d["kind"] is not None else None
        thread = d.get("thread", "merged")
        prof = Profile(kind, thread_id=None if thread == "merged" else int(thread))
        for row in d["pairs"]:
            stats = PairStats(int(row["wasteful_bytes"]), int(row["total_bytes"]), int(row["pair_count"]))
            if not 0 <= stats.wasteful_bytes <= stats.total_bytes or stats.pair_count < 0:
                raise ValueError(f"inconsistent counters for pair {row['armed_ctx']}->{row['trap_ctx']}")
            prof.pairs[(int(row["armed_ctx"]), int(row["trap_ctx"]))] = stats
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed profile: {exc!r}") from None
    prof.pairs = dict(sorted(prof.pairs.items()))
    return prof


def loads_profile(text: str) -> tuple[Profile, Optional[dict]]:
    d = json.loads(text)
    if not isinstance(d, dict):
        raise ValueError("profile must be a JSON object")
    return profile_from_dict(d), d.get("manifest")

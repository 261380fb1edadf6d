"""Project data ingestion, filtering, banding, splitting, and synthesis.

Every transform is a pure ProjectSet -> ProjectSet function that appends a
lineage line to the set's provenance, so a dataset always explains how it
was produced.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy import stats as sps

CSV_COLUMNS = ("id", "afp", "team_size", "resource_level", "dev_type", "quality", "effort")
DEV_TYPES = ("new", "enhancement", "redevelopment", "other")
QUALITY_RATINGS = ("A", "B", "C", "D")
RESOURCE_LEVELS = (1, 2, 3, 4)

# Productivity bands: band1/band2/band3 are disjoint, combined is their union.
BAND_EDGES = {"band1": (0.2, 10.0), "band2": (10.0, 20.0), "band3": (20.0, math.inf)}
PRODUCTIVITY_FLOOR = 0.2


@dataclass(frozen=True)
class ProjectRecord:
    id: str
    afp: float
    team_size: float
    resource_level: int
    dev_type: str
    quality: str
    effort: float

    def __post_init__(self):
        for name in ("afp", "team_size", "effort"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"record {self.id!r}: {name} must be finite and > 0, got {v}")
        if self.resource_level not in RESOURCE_LEVELS:
            raise ValueError(f"record {self.id!r}: resource_level must be 1..4")
        if self.dev_type not in DEV_TYPES:
            raise ValueError(f"record {self.id!r}: unknown dev_type {self.dev_type!r}")
        if self.quality not in QUALITY_RATINGS:
            raise ValueError(f"record {self.id!r}: unknown quality {self.quality!r}")

    @property
    def productivity(self) -> float:
        # always derived, never stored, so it can't go stale
        return self.effort / self.afp


@dataclass(frozen=True)
class ProjectSet:
    records: tuple[ProjectRecord, ...]
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "provenance", tuple(self.provenance))
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate project ids: {dupes}")

    def __len__(self):
        return len(self.records)

    def efforts(self) -> np.ndarray:
        return np.array([r.effort for r in self.records], dtype=np.float64)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=np.float64)

    def with_note(self, note: str) -> "ProjectSet":
        return ProjectSet(self.records, self.provenance + (note,))


@dataclass(frozen=True)
class SummaryStats:
    """Distribution summary of a project set's effort column."""

    n: int
    mean: float
    stdev: float
    minimum: float
    maximum: float
    median: float
    skewness: float
    kurtosis: float
    conventions: str = (
        "stdev: sample (n-1); skewness: adjusted Fisher-Pearson; "
        "kurtosis: excess, sample bias corrected"
    )


@dataclass(frozen=True)
class OutlierReport:
    q1: float
    q3: float
    lower: float
    upper: float
    removed_ids: tuple[str, ...]
    field_name: str = "effort"
    method: str = "quartiles by linear interpolation at p*(n-1) over sorted values"

    @property
    def iqr(self) -> float:
        return self.q3 - self.q1


class SchemaError(ValueError):
    """The CSV header does not match the expected project schema."""


def _parse_row(row: dict) -> ProjectRecord:
    def need(key):
        v = (row.get(key) or "").strip()
        if not v:
            raise ValueError(f"missing {key}")
        return v

    return ProjectRecord(
        id=need("id"),
        afp=float(need("afp")),
        team_size=float(need("team_size")),
        resource_level=int(need("resource_level")),
        dev_type=need("dev_type").lower(),
        quality=need("quality").upper(),
        effort=float(need("effort")),
    )


def load_projects(path) -> ProjectSet:
    """Read a project CSV; malformed rows are dropped and counted, not fatal.

    Lines starting with # are comments (the experiment driver embeds its
    config hash that way) and are skipped before parsing.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        header = reader.fieldnames or []
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise SchemaError(
                f"{path.name}: header missing required column(s) {', '.join(missing)}"
            )
        records, dropped = [], 0
        for row in reader:
            try:
                records.append(_parse_row(row))
            except (ValueError, TypeError):
                dropped += 1
    note = f"loaded {len(records)} records from {path.name} ({dropped} rows dropped)"
    return ProjectSet(tuple(records), (note,))


def filter_projects(ps: ProjectSet) -> ProjectSet:
    """Keep A/B-quality, new-development records; idempotent.

    Completeness is already guaranteed record-by-record at parse time, so the
    completeness step only documents its surviving count.
    """
    steps = []
    recs = [r for r in ps.records if r.quality in ("A", "B")]
    steps.append(f"quality A/B: {len(recs)} survive")
    steps.append(f"complete records: {len(recs)} survive")
    recs = [r for r in recs if r.dev_type == "new"]
    steps.append(f"new development only: {len(recs)} survive")
    return ProjectSet(tuple(recs), ps.provenance + ("filter: " + "; ".join(steps),))


def band_of(productivity: float):
    """Band name for a productivity ratio, or None below the 0.2 floor."""
    for name, (lo, hi) in BAND_EDGES.items():
        if lo <= productivity < hi:
            return name
    return None


def partition_by_productivity(ps: ProjectSet) -> dict[str, ProjectSet]:
    """Split into band1/band2/band3 plus their union; sub-floor records drop out."""
    buckets: dict[str, list[ProjectRecord]] = {k: [] for k in BAND_EDGES}
    excluded = 0
    for r in ps.records:
        band = band_of(r.productivity)
        if band is None:
            excluded += 1
        else:
            buckets[band].append(r)
    out = {}
    for name, recs in buckets.items():
        lo, hi = BAND_EDGES[name]
        hi_txt = "inf" if math.isinf(hi) else f"{hi:g}"
        out[name] = ProjectSet(
            tuple(recs),
            ps.provenance
            + (f"band {name}: productivity in [{lo:g}, {hi_txt}), n={len(recs)}, "
               f"{excluded} below floor excluded",),
        )
    union = buckets["band1"] + buckets["band2"] + buckets["band3"]
    out["combined"] = ProjectSet(
        tuple(union),
        ps.provenance + (f"band combined: union of band1..band3, n={len(union)}, "
                         f"{excluded} below floor excluded",),
    )
    return out


def train_size(n: int, ratio: float = 0.7) -> int:
    """Round-half-up share of n, computed in exact arithmetic."""
    return int(Fraction(str(ratio)) * n + Fraction(1, 2))


def split_train_test(ps: ProjectSet, ratio: float = 0.7, seed: int = 0):
    """Seeded uniform shuffle, then a round-half-up prefix as the training set."""
    n = len(ps)
    if n < 2:
        raise ValueError(f"need at least 2 records to split, got {n}")
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    k = train_size(n, ratio)
    perm = np.random.default_rng(seed).permutation(n)
    train = tuple(ps.records[i] for i in sorted(perm[:k]))
    test = tuple(ps.records[i] for i in sorted(perm[k:]))
    note = f"split ratio={ratio:g} seed={seed}: train={len(train)} test={len(test)}"
    return (
        ProjectSet(train, ps.provenance + (note + " [train]",)),
        ProjectSet(test, ps.provenance + (note + " [test]",)),
    )


def remove_outliers_iqr(ps: ProjectSet, field_name: str = "effort"):
    """Drop records outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR] of the named column."""
    n = len(ps)
    if n < 4:
        raise ValueError(f"need at least 4 records for quartiles, got {n}")
    values = ps.column(field_name)
    q1, q3 = np.percentile(values, [25.0, 75.0])  # linear interpolation at p*(n-1)
    iqr = q3 - q1
    lower, upper = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    keep, removed = [], []
    for r, v in zip(ps.records, values):
        (keep if lower <= v <= upper else removed).append(r)
    report = OutlierReport(
        q1=float(q1),
        q3=float(q3),
        lower=float(lower),
        upper=float(upper),
        removed_ids=tuple(r.id for r in removed),
        field_name=field_name,
    )
    note = (f"outlier removal on {field_name}: bounds [{lower:g}, {upper:g}], "
            f"removed {len(removed)} of {n}")
    return ProjectSet(tuple(keep), ps.provenance + (note,)), report


def summarize(ps: ProjectSet) -> SummaryStats:
    n = len(ps)
    if n < 2:
        raise ValueError(f"need at least 2 records to summarize, got {n}")
    e = ps.efforts()
    return SummaryStats(
        n=n,
        mean=float(e.mean()),
        stdev=float(e.std(ddof=1)),
        minimum=float(e.min()),
        maximum=float(e.max()),
        median=float(np.median(e)),
        skewness=float(sps.skew(e, bias=False)),
        kurtosis=float(sps.kurtosis(e, fisher=True, bias=False)),
    )


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic project set with controllable band composition."""

    n: int
    fractions: tuple[float, float, float]  # band1, band2, band3 shares; sum to 1
    seed: int = 0
    noise: float = 0.05  # effort = P * AFP * (1 + u), u ~ U(-noise, noise)
    p_max: float = 300.0  # productivity ceiling for band3
    afp_median: float = 500.0
    afp_sigma: float = 1.0
    team_p: float = 0.15  # geometric success prob for team size
    resource_probs: tuple = (0.55, 0.25, 0.10, 0.10)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if len(self.fractions) != 3 or any(f < 0 for f in self.fractions):
            raise ValueError("fractions must be 3 nonnegative shares")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {sum(self.fractions)}")
        if not 0 <= self.noise < 0.5:
            raise ValueError("noise must be in [0, 0.5)")
        if self.p_max <= 20.0:
            raise ValueError("p_max must exceed 20 (the band3 floor)")


def _largest_remainder_counts(n: int, fractions) -> list[int]:
    raw = [f * n for f in fractions]
    counts = [int(math.floor(x)) for x in raw]
    rem = n - sum(counts)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[:rem]:
        counts[i] += 1
    return counts


def synth_generate(spec: SynthSpec) -> ProjectSet:
    """Generate records whose recomputed productivity stays in its target band.

    Productivity is drawn from the band shrunk by the noise margin, so the
    multiplicative effort noise can never push a record across a band edge.
    """
    rng = np.random.default_rng(spec.seed)
    counts = _largest_remainder_counts(spec.n, spec.fractions)
    edges = [(0.2, 10.0), (10.0, 20.0), (20.0, spec.p_max)]
    records = []
    idx = 0
    for (lo, hi), count in zip(edges, counts):
        p_lo = lo / (1.0 - spec.noise) if spec.noise else lo
        p_hi = hi / (1.0 + spec.noise)
        if not p_lo < p_hi:
            raise ValueError(f"noise {spec.noise} leaves band [{lo}, {hi}) empty")
        for _ in range(count):
            afp = float(rng.lognormal(math.log(spec.afp_median), spec.afp_sigma))
            team = float(rng.geometric(spec.team_p))
            level = int(rng.choice(RESOURCE_LEVELS, p=spec.resource_probs))
            p = float(rng.uniform(p_lo, p_hi))
            u = float(rng.uniform(-spec.noise, spec.noise)) if spec.noise else 0.0
            effort = p * afp * (1.0 + u)
            quality = "A" if rng.random() < 0.7 else "B"
            records.append(
                ProjectRecord(
                    id=f"S{idx:05d}",
                    afp=afp,
                    team_size=team,
                    resource_level=level,
                    dev_type="new",
                    quality=quality,
                    effort=effort,
                )
            )
            idx += 1
    note = (f"synthetic: n={spec.n} seed={spec.seed} fractions="
            f"({spec.fractions[0]:g}, {spec.fractions[1]:g}, {spec.fractions[2]:g}) "
            f"noise={spec.noise:g}")
    return ProjectSet(tuple(records), (note,))


def most_frequent_resource_level(ps: ProjectSet) -> int:
    """Dummy-encoding baseline: the modal level, ties broken toward the largest."""
    counts = {}
    for r in ps.records:
        counts[r.resource_level] = counts.get(r.resource_level, 0) + 1
    if not counts:
        raise ValueError("empty project set")
    best = max(counts.items(), key=lambda kv: (kv[1], kv[0]))
    return best[0]

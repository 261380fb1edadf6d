"""Statistical comparison suite: Wilcoxon signed-rank, Anderson-Darling
normality, Box-Cox transformation, and Scott-Knott clustering of models.

The test procedures are implemented here; scipy supplies only numeric
primitives (ranking, normal CDF, chi-square quantiles).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import chi2, rankdata


@dataclass(frozen=True)
class TestResult:
    method: str
    statistic: float
    p_value: float
    n: int
    notes: str = ""

    def __post_init__(self):
        if not 0.0 < self.p_value <= 1.0:
            raise ValueError(f"p_value must be in (0, 1], got {self.p_value}")


class InsufficientDataError(ValueError):
    """Too few usable observations for the requested test."""


def _exact_signed_rank_p(doubled_ranks: np.ndarray, w_small_doubled: int, n: int) -> float:
    """Two-sided exact p via the distribution of the signed-rank sum.

    Works on ranks doubled to integers (average ranks are multiples of 1/2),
    counting subsets by dynamic programming instead of enumerating 2^n sign
    patterns outright.
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for dr in doubled_ranks:
        nxt = counts.copy()
        nxt[dr:] += counts[: total + 1 - dr]
        counts = nxt
    cdf = counts[: w_small_doubled + 1].sum() / (2.0 ** n)
    return min(1.0, 2.0 * cdf)


def wilcoxon_signed_rank(a, b) -> TestResult:
    """Paired two-sided Wilcoxon test on the differences a - b.

    Zero differences are dropped, tied absolute differences get average
    ranks.  Exact enumeration for n <= 25, otherwise a normal approximation
    with tie-corrected variance and continuity correction.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be aligned 1-d sequences")
    d = a - b
    zeros = int(np.count_nonzero(d == 0.0))
    d = d[d != 0.0]
    n = d.size
    if n < 5:
        raise InsufficientDataError(
            f"insufficient nonzero differences: {n} after dropping {zeros} zeros (need 5)"
        )
    absd = np.abs(d)
    ranks = rankdata(absd, method="average")
    w_plus = float(ranks[d > 0].sum())
    w_minus = float(ranks[d < 0].sum())
    w = min(w_plus, w_minus)
    tie_groups = np.unique(absd, return_counts=True)[1]
    has_ties = bool(np.any(tie_groups > 1))

    notes = [f"zeros dropped: {zeros}", f"ties: {'yes' if has_ties else 'no'}"]
    if n <= 25:
        doubled = np.rint(2.0 * ranks).astype(np.int64)
        p = _exact_signed_rank_p(doubled, int(round(2.0 * w)), n)
        notes.append("exact enumeration")
    else:
        mu = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - float(
            np.sum(tie_groups ** 3 - tie_groups)
        ) / 48.0
        z = (w - mu + 0.5) / math.sqrt(var)  # continuity corrected
        p = min(1.0, 2.0 * float(ndtr(z)))
        notes.append("normal approximation, tie-corrected variance")
    p = max(p, 5e-324)
    return TestResult(
        method="wilcoxon-signed-rank",
        statistic=w,
        p_value=p,
        n=n,
        notes="; ".join(notes),
    )


def anderson_darling_normality(x) -> TestResult:
    """Anderson-Darling test of normality with estimated mean and variance.

    Uses the small-sample modified statistic and the standard piecewise
    exponential p-value approximation for the estimated-parameters case.
    """
    x = np.sort(np.asarray(x, dtype=np.float64))
    n = x.size
    if n < 8:
        raise InsufficientDataError(f"need at least 8 observations, got {n}")
    s = x.std(ddof=1)
    if s == 0:
        raise ValueError("zero variance: normality test undefined for constant data")
    z = (x - x.mean()) / s
    u = ndtr(z)
    eps = np.finfo(np.float64).tiny
    u = np.clip(u, eps, 1.0 - 1e-16)
    i = np.arange(1, n + 1)
    a2 = -n - float(np.mean((2 * i - 1) * (np.log(u) + np.log(1.0 - u[::-1]))))
    astar = a2 * (1.0 + 0.75 / n + 2.25 / (n * n))
    if astar >= 0.6:
        p = math.exp(1.2937 - 5.709 * astar + 0.0186 * astar * astar)
    elif astar > 0.34:
        p = math.exp(0.9177 - 4.279 * astar - 1.38 * astar * astar)
    elif astar > 0.2:
        p = 1.0 - math.exp(-8.318 + 42.796 * astar - 59.938 * astar * astar)
    else:
        p = 1.0 - math.exp(-13.436 + 101.14 * astar - 223.73 * astar * astar)
    p = min(1.0, max(p, 5e-324))
    return TestResult(
        method="anderson-darling",
        statistic=astar,
        p_value=p,
        n=n,
        notes="mean and variance estimated; small-sample modified statistic",
    )


@dataclass(frozen=True)
class BoxCoxResult:
    lam: float
    shift: float
    transformed: np.ndarray
    log_likelihood: float


def _boxcox_apply(xs: np.ndarray, lam: float) -> np.ndarray:
    if abs(lam) < 1e-8:
        return np.log(xs)
    return (np.power(xs, lam) - 1.0) / lam


def _boxcox_ll(xs: np.ndarray, log_sum: float, lam: float) -> float:
    y = _boxcox_apply(xs, lam)
    var = float(y.var())  # MLE variance (divide by n)
    if var <= 0:
        return -math.inf
    n = xs.size
    return -0.5 * n * math.log(var) + (lam - 1.0) * log_sum


def box_cox(x, lam: float | None = None) -> BoxCoxResult:
    """Power transform toward normality; lambda fitted unless forced.

    Non-positive data is first shifted by 1 - min(x) (recorded in the
    result).  The fitted lambda maximizes the profile log-likelihood over
    [-5, 5] by golden-section search to a 1e-5 interval.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < 4:
        raise InsufficientDataError(f"need at least 4 observations, got {x.size}")
    if np.all(x == x[0]):
        raise ValueError("constant data cannot be transformed")
    mn = float(x.min())
    shift = 1.0 - mn if mn <= 0 else 0.0
    xs = x + shift
    log_sum = float(np.log(xs).sum())

    if lam is None:
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        lo, hi = -5.0, 5.0
        c = hi - invphi * (hi - lo)
        d = lo + invphi * (hi - lo)
        fc = _boxcox_ll(xs, log_sum, c)
        fd = _boxcox_ll(xs, log_sum, d)
        while hi - lo > 1e-5:
            if fc > fd:
                hi, d, fd = d, c, fc
                c = hi - invphi * (hi - lo)
                fc = _boxcox_ll(xs, log_sum, c)
            else:
                lo, c, fc = c, d, fd
                d = lo + invphi * (hi - lo)
                fd = _boxcox_ll(xs, log_sum, d)
        lam = 0.5 * (lo + hi)
    return BoxCoxResult(
        lam=float(lam),
        shift=shift,
        transformed=_boxcox_apply(xs, float(lam)),
        log_likelihood=_boxcox_ll(xs, log_sum, float(lam)),
    )


@dataclass(frozen=True)
class SplitDiagnostic:
    """One evaluated partition during Scott-Knott recursion."""

    segment: tuple[str, ...]
    split_at: int  # left group = segment[:split_at]
    b0: float
    lambda_star: float
    nu0: float
    critical: float
    significant: bool


@dataclass(frozen=True)
class ScottKnottGrouping:
    order: tuple[str, ...]  # model names sorted by ascending mean
    means: tuple[float, ...]
    groups: tuple[int, ...]  # 1-based group index per model, aligned with order
    diagnostics: tuple[SplitDiagnostic, ...]

    def __post_init__(self):
        g = self.groups
        if any(g[i + 1] - g[i] not in (0, 1) for i in range(len(g) - 1)):
            raise ValueError("group indices must be nondecreasing contiguous runs")


_SK_FACTOR = math.pi / (2.0 * (math.pi - 2.0))


def _best_split(means: np.ndarray):
    """Split index maximizing the between-group sum of squares over means."""
    k = means.size
    total = means.sum()
    best_s, best_b0 = 1, -math.inf
    for s in range(1, k):
        t1 = means[:s].sum()
        t2 = total - t1
        b0 = t1 * t1 / s + t2 * t2 / (k - s) - total * total / k
        if b0 > best_b0:
            best_s, best_b0 = s, b0
    return best_s, best_b0


def scott_knott(models: dict, alpha: float = 0.05) -> ScottKnottGrouping:
    """Cluster models into statistically homogeneous groups by mean error.

    Recursive binary partition of the sorted means: the split maximizing the
    between-group sum of squares B0 is kept when the statistic
    lambda* = pi/(2(pi-2)) * B0 / sigma0^2 exceeds the chi-square quantile
    at nu0 = k/(pi-2) degrees of freedom.

    Estimator pinning (unequal group sizes): sigma0^2 pools the spread of
    the segment's means with the variance of a treatment mean, estimated
    globally as s2_mean = pooled-within-MSE / mean(group size) with
    nu = sum(n_i - 1) degrees of freedom over all models.
    """
    if len(models) < 2:
        raise ValueError(f"need at least 2 models, got {len(models)}")
    samples = {}
    for name, xs in models.items():
        arr = np.asarray(xs, dtype=np.float64)
        if arr.size < 2:
            raise ValueError(f"model {name!r} needs at least 2 observations")
        samples[name] = arr

    order = sorted(samples, key=lambda name: (samples[name].mean(), name))
    means = np.array([samples[name].mean() for name in order])

    nu = sum(s.size - 1 for s in samples.values())
    sse = sum(float(((s - s.mean()) ** 2).sum()) for s in samples.values())
    mse = sse / nu if nu > 0 else 0.0
    mean_n = float(np.mean([s.size for s in samples.values()]))
    s2_mean = mse / mean_n

    diagnostics: list[SplitDiagnostic] = []
    boundaries = []  # indices where a new group starts

    def recurse(lo: int, hi: int):  # segment order[lo:hi]
        k = hi - lo
        if k < 2:
            return
        seg = means[lo:hi]
        s, b0 = _best_split(seg)
        seg_mean = seg.mean()
        sigma0_sq = (float(((seg - seg_mean) ** 2).sum()) + nu * s2_mean) / (k + nu)
        nu0 = k / (math.pi - 2.0)
        critical = float(chi2.ppf(1.0 - alpha, nu0))
        lam_star = _SK_FACTOR * b0 / sigma0_sq if sigma0_sq > 0 else 0.0
        significant = lam_star > critical and b0 > 0
        diagnostics.append(
            SplitDiagnostic(
                segment=tuple(order[lo:hi]),
                split_at=s,
                b0=float(b0),
                lambda_star=float(lam_star),
                nu0=nu0,
                critical=critical,
                significant=significant,
            )
        )
        if significant:
            boundaries.append(lo + s)
            recurse(lo, lo + s)
            recurse(lo + s, hi)

    recurse(0, len(order))

    group_ids = []
    g = 1
    cuts = sorted(boundaries)
    for i in range(len(order)):
        if i in cuts:
            g += 1
        group_ids.append(g)
    return ScottKnottGrouping(
        order=tuple(order),
        means=tuple(float(m) for m in means),
        groups=tuple(group_ids),
        diagnostics=tuple(diagnostics),
    )

"""Unbiased accuracy criteria and the random-guessing baseline.

MAE, MBRE, MIBRE and ME summarize prediction error directly; SA and the
effect size compare a model's MAE against many runs of random guessing,
where each case is predicted by the actual effort of another case.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Canonical rendering order for report tables.
REPORT_COLUMNS = ("MAE", "MBRE", "MIBRE", "SA", "Delta", "ME")


@dataclass(frozen=True)
class PredictionSet:
    """Aligned (actual, predicted) effort pairs."""

    actuals: np.ndarray
    predicted: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.actuals, dtype=np.float64)
        p = np.asarray(self.predicted, dtype=np.float64)
        if a.ndim != 1 or a.shape != p.shape:
            raise ValueError("actuals and predictions must be aligned 1-d sequences")
        if a.size < 1:
            raise ValueError("at least one pair required")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
            raise ValueError("non-finite values in prediction set")
        if not np.all(a > 0):
            raise ValueError("actual efforts must be positive")
        object.__setattr__(self, "actuals", a)
        object.__setattr__(self, "predicted", p)

    def __len__(self):
        return int(self.actuals.size)


@dataclass(frozen=True)
class GuessBaseline:
    """Monte Carlo random-guess reference for a set of actual efforts."""

    mae_p_bar: float  # mean over runs of the per-run guess MAE
    sp0: float  # sample stdev of the per-run guess MAE
    runs: int
    seed: int
    exact_mae: float  # closed-form expectation over ordered pairs, cross-check
    degenerate: bool = False  # all actuals equal


def exact_pairwise_mae(actuals) -> float:
    """E|e_i - e_j| over ordered pairs i != j, via the sorted-order identity."""
    e = np.sort(np.asarray(actuals, dtype=np.float64))
    n = e.size
    if n < 2:
        raise ValueError("need at least 2 actuals")
    # sum_{i<j} (e_j - e_i) = sum_j e_j * (2j - n + 1), zero-based j
    total = float(np.sum(e * (2.0 * np.arange(n) - n + 1.0)))
    return 2.0 * total / (n * (n - 1))


def random_guess_baseline(actuals, runs: int = 1000, seed: int = 0) -> GuessBaseline:
    """Per run, predict each case by a uniformly chosen other case's actual.

    Run-level seeds are spawned from the master seed, so results do not
    depend on execution order.
    """
    e = np.asarray(actuals, dtype=np.float64)
    n = e.size
    if n < 2:
        raise ValueError(f"need at least 2 actuals, got {n}")
    if runs < 2:
        raise ValueError(f"need at least 2 runs, got {runs}")
    idx = np.arange(n)
    run_maes = np.empty(runs, dtype=np.float64)
    for r, child in enumerate(np.random.SeedSequence(seed).spawn(runs)):
        rng = np.random.default_rng(child)
        j = rng.integers(0, n - 1, size=n)
        j = j + (j >= idx)  # uniform over j != i
        run_maes[r] = np.mean(np.abs(e - e[j]))
    mae_p_bar = float(run_maes.mean())
    sp0 = float(run_maes.std(ddof=1))
    return GuessBaseline(
        mae_p_bar=mae_p_bar,
        sp0=sp0,
        runs=runs,
        seed=seed,
        exact_mae=exact_pairwise_mae(e),
        degenerate=bool(np.all(e == e[0])),
    )


def compute_error_metrics(p: PredictionSet):
    """(MAE, MBRE, MIBRE, ME); MBRE requires min(actual, predicted) != 0 per pair."""
    e, eh = p.actuals, p.predicted
    ae = np.abs(e - eh)
    lo = np.minimum(e, eh)
    hi = np.maximum(e, eh)
    zero = np.flatnonzero(lo == 0.0)
    if zero.size:
        i = int(zero[0])
        raise ZeroDivisionError(
            f"MBRE undefined: min(actual, predicted) = 0 at pair {i} "
            f"(actual={e[i]:g}, predicted={eh[i]:g})"
        )
    mae = float(ae.mean())
    mbre = float((ae / lo).mean())
    mibre = float((ae / hi).mean())
    me = float((e - eh).mean())
    return mae, mbre, mibre, me


def standardized_accuracy(mae: float, baseline: GuessBaseline):
    """(SA, signed effect size) against the random-guess baseline.

    SA = 1 - MAE / MAE_pbar.  The signed effect size (MAE - MAE_pbar) / SP0
    is negative for models that beat guessing; reports quote its magnitude
    and keep this raw sign alongside.
    """
    if mae < 0:
        raise ValueError("mae must be nonnegative")
    if baseline.degenerate or baseline.mae_p_bar <= 0:
        raise ValueError("degenerate baseline: random-guess MAE is 0")
    sa = 1.0 - mae / baseline.mae_p_bar
    if baseline.sp0 <= 0:
        raise ValueError("degenerate baseline: SP0 is 0, effect size undefined")
    delta_signed = (mae - baseline.mae_p_bar) / baseline.sp0
    return sa, delta_signed


@dataclass(frozen=True)
class EvalReport:
    """One model's accuracy row; delta is the magnitude, sign kept separately."""

    n: int
    mae: float
    mbre: float
    mibre: float
    me: float
    sa: float
    delta: float
    delta_signed: float

    def __post_init__(self):
        if self.mae < 0:
            raise ValueError("mae must be nonnegative")
        if self.sa > 1.0 + 1e-12:
            raise ValueError("sa cannot exceed 1")

    def row(self) -> dict:
        """Values keyed by REPORT_COLUMNS; SA scaled to percent style."""
        return {
            "MAE": self.mae,
            "MBRE": self.mbre,
            "MIBRE": self.mibre,
            "SA": 100.0 * self.sa,
            "Delta": self.delta,
            "ME": self.me,
        }


def evaluate(predicted, actuals, baseline: GuessBaseline) -> EvalReport:
    p = PredictionSet(actuals, predicted)
    mae, mbre, mibre, me = compute_error_metrics(p)
    sa, delta_signed = standardized_accuracy(mae, baseline)
    return EvalReport(
        n=len(p),
        mae=mae,
        mbre=mbre,
        mibre=mibre,
        me=me,
        sa=sa,
        delta=abs(delta_signed),
        delta_signed=delta_signed,
    )

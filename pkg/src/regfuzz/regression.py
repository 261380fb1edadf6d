"""Ordinary least squares, stepwise input selection, and dummy encoding.

Fits are solved through a pivoted QR factorization rather than the normal
equations, and coefficient p-values come from the Student-t CDF evaluated
via the regularized incomplete beta function.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import qr, solve_triangular
from scipy.special import betainc


class RankDeficiencyError(ValueError):
    """The design matrix has linearly dependent columns."""


@dataclass(frozen=True)
class DesignMatrix:
    """Feature columns by name; the intercept column is implicit."""

    columns: tuple[str, ...]
    values: np.ndarray  # (n_rows, n_columns)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValueError("design matrix must be 2-dimensional")
        if vals.shape[1] != len(self.columns):
            raise ValueError(
                f"{len(self.columns)} column names for {vals.shape[1]} columns"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("design matrix contains non-finite entries")
        object.__setattr__(self, "values", vals)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def take(self, names: Sequence[str]) -> "DesignMatrix":
        idx = [self.columns.index(n) for n in names]
        return DesignMatrix(tuple(names), self.values[:, idx])


@dataclass(frozen=True)
class OlsFit:
    """A least-squares fit; index 0 of every per-coefficient array is the intercept."""

    columns: tuple[str, ...]
    coefficients: np.ndarray
    stderr: np.ndarray
    tstats: np.ndarray
    pvalues: np.ndarray
    residuals: np.ndarray
    df_resid: int
    r2: float
    sigma2: float


def _t_sf2(t: np.ndarray, df: int) -> np.ndarray:
    """Two-sided p-value of Student-t statistics with df degrees of freedom."""
    t = np.asarray(t, dtype=np.float64)
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def fit_ols(X: DesignMatrix, y) -> OlsFit:
    y = np.asarray(y, dtype=np.float64)
    n = X.n_rows
    if y.shape != (n,):
        raise ValueError(f"y has {y.shape} entries for {n} design rows")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite entries")
    p = len(X.columns) + 1  # with intercept
    if n <= p:
        raise ValueError(f"need more than {p} rows to fit {p} coefficients, got {n}")

    A = np.column_stack([np.ones(n), X.values])
    names = ("Intercept",) + X.columns
    Q, R, piv = qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = (diag[0] if diag.size else 0.0) * max(A.shape) * np.finfo(np.float64).eps
    rank = int(np.count_nonzero(diag > tol))
    if rank < p:
        dependent = sorted(names[piv[j]] for j in range(rank, p))
        raise RankDeficiencyError(
            f"design matrix is rank deficient; dependent columns: {', '.join(dependent)}"
        )

    qty = Q.T @ y
    beta_piv = solve_triangular(R, qty)
    beta = np.empty(p)
    beta[piv] = beta_piv

    resid = y - A @ beta
    ssr = float(resid @ resid)
    df = n - p
    sigma2 = ssr / df
    r_inv = solve_triangular(R, np.eye(p))
    cov_piv = sigma2 * (r_inv @ r_inv.T)
    var = np.empty(p)
    var[piv] = np.diag(cov_piv)
    stderr = np.sqrt(np.maximum(var, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        tstats = np.where(stderr > 0, beta / stderr, np.inf)
    pvalues = _t_sf2(tstats, df)

    sst = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    return OlsFit(
        columns=X.columns,
        coefficients=beta,
        stderr=stderr,
        tstats=tstats,
        pvalues=pvalues,
        residuals=resid,
        df_resid=df,
        r2=r2,
        sigma2=sigma2,
    )


def predict_ols(fit: OlsFit, x) -> float:
    """Intercept plus the dot product of fitted slopes with the feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (len(fit.columns),):
        raise ValueError(
            f"expected {len(fit.columns)} feature values, got shape {x.shape}"
        )
    return float(fit.coefficients[0] + fit.coefficients[1:] @ x)


def predict_ols_many(fit: OlsFit, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(fit.columns):
        raise ValueError(f"expected (n, {len(fit.columns)}) feature matrix")
    return fit.coefficients[0] + X @ fit.coefficients[1:]


def _try_fit(X: DesignMatrix, names, y):
    try:
        return fit_ols(X.take(names), y)
    except (RankDeficiencyError, ValueError):
        return None


def stepwise_select(
    candidates: DesignMatrix,
    y,
    p_enter: float = 0.05,
    p_remove: float = 0.10,
) -> tuple[tuple[str, ...], OlsFit]:
    """Bidirectional stepwise selection on coefficient p-values.

    Forward step admits the candidate with the smallest p-value below
    p_enter; backward step drops the included column with the largest
    p-value above p_remove; repeat until stable.  Ties break toward the
    earlier declared column, so selection is deterministic.  May return an
    intercept-only fit.
    """
    if not 0 < p_enter <= p_remove:
        raise ValueError("require 0 < p_enter <= p_remove")
    if not candidates.columns:
        raise ValueError("at least one candidate column required")
    y = np.asarray(y, dtype=np.float64)

    selected: list[str] = []
    while True:
        changed = False
        best_name, best_p = None, None
        for name in candidates.columns:
            if name in selected:
                continue
            fit = _try_fit(candidates, selected + [name], y)
            if fit is None:
                continue
            p = float(fit.pvalues[len(selected) + 1])  # the newcomer's coefficient
            if p < p_enter and (best_p is None or p < best_p):
                best_name, best_p = name, p
        if best_name is not None:
            selected.append(best_name)
            selected.sort(key=candidates.columns.index)
            changed = True

        while selected:
            fit = fit_ols(candidates.take(selected), y)
            pvals = fit.pvalues[1:]
            worst = int(np.argmax(pvals))
            if pvals[worst] > p_remove:
                del selected[worst]
                changed = True
            else:
                break

        if not changed:
            break

    return tuple(selected), fit_ols(candidates.take(selected), y)


def encode_dummies(values, baseline, prefix: str = "ResourceLevel") -> DesignMatrix:
    """Drop-one 0/1 encoding: one indicator per non-baseline category.

    Column names append the category to `prefix`; rows equal to the baseline
    get all zeros.
    """
    values = list(values)
    cats = sorted(set(values))
    if len(cats) < 2:
        raise ValueError(f"need at least 2 distinct categories, got {cats}")
    if baseline not in cats:
        raise ValueError(f"baseline {baseline!r} not among categories {cats}")

    def fmt(c):
        if isinstance(c, float) and c.is_integer():
            c = int(c)
        return f"{prefix}{c}"

    keep = [c for c in cats if c != baseline]
    mat = np.zeros((len(values), len(keep)), dtype=np.float64)
    for j, cat in enumerate(keep):
        mat[:, j] = [1.0 if v == cat else 0.0 for v in values]
    return DesignMatrix(tuple(fmt(c) for c in keep), mat)

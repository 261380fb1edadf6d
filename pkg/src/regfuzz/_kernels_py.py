"""NumPy implementations of the batch inference kernels.

This is the reference backend: the compiled extension in _speedups.pyx must
match these branch semantics exactly (vertical edges included).  Both consume
the packed arrays produced by fis._pack and write results into preallocated
`out` / `fired` buffers.
"""
from __future__ import annotations

import numpy as np

SHAPE_TRIANGLE = 0
SHAPE_TRAPEZOID = 1


def mf_values(x: np.ndarray, shape: int, params) -> np.ndarray:
    """Vectorized membership degrees; plateau wins at degenerate breakpoints."""
    a, b, c, d = (float(p) for p in params)
    out = np.zeros(np.shape(x), dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if shape == SHAPE_TRIANGLE:
        if b > a:
            m = (x > a) & (x < b)
            out[m] = (x[m] - a) / (b - a)
        if c > b:
            m = (x > b) & (x < c)
            out[m] = (c - x[m]) / (c - b)
        out[x == b] = 1.0
    else:
        if b > a:
            m = (x > a) & (x < b)
            out[m] = (x[m] - a) / (b - a)
        if d > c:
            m = (x > c) & (x < d)
            out[m] = (d - x[m]) / (d - c)
        out[(x >= b) & (x <= c)] = 1.0
    return out


def _rule_strengths(X, and_code, ante_shape, ante_params, weights):
    """(n_records, n_rules) matrix of weighted firing strengths."""
    n = X.shape[0]
    n_rules, n_inputs = ante_shape.shape
    strengths = np.empty((n, n_rules), dtype=np.float64)
    for r in range(n_rules):
        acc = None
        for k in range(n_inputs):
            code = ante_shape[r, k]
            if code < 0:  # don't care
                continue
            deg = mf_values(X[:, k], int(code), ante_params[r, k])
            if acc is None:
                acc = deg
            elif and_code == 0:
                np.minimum(acc, deg, out=acc)
            else:
                acc *= deg
        if acc is None:
            acc = np.ones(n, dtype=np.float64)
        strengths[:, r] = weights[r] * acc
    return strengths


def sugeno_batch(X, and_code, ante_shape, ante_params, weights, cons, out, fired):
    """Weighted-average defuzzification over constant or linear consequents."""
    n_inputs = ante_shape.shape[1]
    strengths = _rule_strengths(X, and_code, ante_shape, ante_params, weights)
    levels = X @ cons[:, :n_inputs].T + cons[:, n_inputs]
    den = strengths.sum(axis=1)
    num = (strengths * levels).sum(axis=1)
    ok = den > 0.0
    fired[:] = ok
    out[:] = 0.0
    out[ok] = num[ok] / den[ok]


def mamdani_batch(
    X,
    and_code,
    ante_shape,
    ante_params,
    weights,
    cons_shape,
    cons_params,
    lo,
    hi,
    resolution,
    out,
    fired,
):
    """Min implication, max aggregation, centroid over a midpoint sample grid."""
    n = X.shape[0]
    n_rules = ante_shape.shape[0]
    step = (hi - lo) / resolution
    grid = lo + (np.arange(resolution) + 0.5) * step
    cons_vals = np.empty((n_rules, resolution), dtype=np.float64)
    for r in range(n_rules):
        cons_vals[r] = mf_values(grid, int(cons_shape[r]), cons_params[r])
    strengths = _rule_strengths(X, and_code, ante_shape, ante_params, weights)
    for i in range(n):
        clipped = np.minimum(strengths[i][:, None], cons_vals)
        agg = clipped.max(axis=0)
        mass = agg.sum()
        if mass > 0.0:
            out[i] = float((grid * agg).sum() / mass)
            fired[i] = 1
        else:
            out[i] = 0.0
            fired[i] = 0

# cython: language_level=3
"""Compiled batch inference kernels.

Branch-for-branch mirror of _kernels_py (the NumPy reference backend); any
semantic change must be made in both places.  Kept free of numpy C-API use
so the build only needs a C compiler.
"""
import numpy as np


cdef inline double _mf(signed char shape, const double* p, double x) noexcept nogil:
    # p points at the 4 packed breakpoints; triangles store [a, b, c, c].
    if shape == 0:
        if x < p[0] or x > p[2]:
            return 0.0
        if x == p[1]:
            return 1.0
        if x < p[1]:
            return (x - p[0]) / (p[1] - p[0])
        return (p[2] - x) / (p[2] - p[1])
    if x < p[0] or x > p[3]:
        return 0.0
    if p[1] <= x <= p[2]:
        return 1.0
    if x < p[1]:
        return (x - p[0]) / (p[1] - p[0])
    return (p[3] - x) / (p[3] - p[2])


cdef inline double _strength(
    const double* row,
    int and_code,
    const signed char* shapes,
    const double* params,
    double weight,
    int n_inputs,
) noexcept nogil:
    cdef double acc = 1.0
    cdef double deg
    cdef int k
    cdef bint first = True
    for k in range(n_inputs):
        if shapes[k] < 0:  # don't care
            continue
        deg = _mf(shapes[k], params + 4 * k, row[k])
        if first:
            acc = deg
            first = False
        elif and_code == 0:
            if deg < acc:
                acc = deg
        else:
            acc *= deg
    return weight * acc


def sugeno_batch(
    double[:, ::1] X,
    int and_code,
    signed char[:, ::1] ante_shape,
    double[:, :, ::1] ante_params,
    double[::1] weights,
    double[:, ::1] cons,
    double[::1] out,
    unsigned char[::1] fired,
):
    """Weighted-average defuzzification over constant or linear consequents."""
    cdef Py_ssize_t n = X.shape[0]
    cdef int n_inputs = <int> ante_shape.shape[1]
    cdef Py_ssize_t n_rules = ante_shape.shape[0]
    cdef Py_ssize_t i, r
    cdef int k
    cdef double w, level, num, den
    with nogil:
        for i in range(n):
            num = 0.0
            den = 0.0
            for r in range(n_rules):
                w = _strength(
                    &X[i, 0], and_code, &ante_shape[r, 0],
                    &ante_params[r, 0, 0], weights[r], n_inputs,
                )
                level = cons[r, n_inputs]
                for k in range(n_inputs):
                    level += cons[r, k] * X[i, k]
                num += w * level
                den += w
            if den > 0.0:
                out[i] = num / den
                fired[i] = 1
            else:
                out[i] = 0.0
                fired[i] = 0


def mamdani_batch(
    double[:, ::1] X,
    int and_code,
    signed char[:, ::1] ante_shape,
    double[:, :, ::1] ante_params,
    double[::1] weights,
    signed char[::1] cons_shape,
    double[:, ::1] cons_params,
    double lo,
    double hi,
    int resolution,
    double[::1] out,
    unsigned char[::1] fired,
):
    """Min implication, max aggregation, centroid over a midpoint sample grid."""
    cdef Py_ssize_t n = X.shape[0]
    cdef int n_inputs = <int> ante_shape.shape[1]
    cdef Py_ssize_t n_rules = ante_shape.shape[0]
    cdef double step = (hi - lo) / resolution
    cdef double[::1] grid = np.empty(resolution, dtype=np.float64)
    cdef double[:, ::1] cons_vals = np.empty((n_rules, resolution), dtype=np.float64)
    cdef double[::1] strengths = np.empty(n_rules, dtype=np.float64)
    cdef Py_ssize_t i, r, j
    cdef double clip, best, mass, moment, x
    with nogil:
        for j in range(resolution):
            grid[j] = lo + (j + 0.5) * step
        for r in range(n_rules):
            for j in range(resolution):
                cons_vals[r, j] = _mf(cons_shape[r], &cons_params[r, 0], grid[j])
        for i in range(n):
            for r in range(n_rules):
                strengths[r] = _strength(
                    &X[i, 0], and_code, &ante_shape[r, 0],
                    &ante_params[r, 0, 0], weights[r], n_inputs,
                )
            mass = 0.0
            moment = 0.0
            for j in range(resolution):
                best = 0.0
                for r in range(n_rules):
                    clip = cons_vals[r, j]
                    if strengths[r] < clip:
                        clip = strengths[r]
                    if clip > best:
                        best = clip
                mass += best
                moment += grid[j] * best
            if mass > 0.0:
                out[i] = moment / mass
                fired[i] = 1
            else:
                out[i] = 0.0
                fired[i] = 0

"""Euclidean projection onto monotone cones by pool adjacent violators."""

from __future__ import annotations

import numpy as np

__all__ = [
    "project_monotone_cone",
    "project_monotone_cone_with_stats",
    "project_monotone_nonneg_cone",
]


def _pav_decreasing(y):
    # Single left-to-right scan over a stack of blocks held as running sums
    # and counts.  Adjacent blocks merge while the left mean is strictly
    # below the right mean; exactly-equal means stay separate (the expanded
    # output is identical either way, with fewer merges).
    n = y.shape[0]
    sums = np.empty(n)
    counts = np.empty(n, dtype=np.int64)
    top = -1
    merges = 0
    for i in range(n):
        top += 1
        sums[top] = y[i]
        counts[top] = 1
        while top > 0 and sums[top - 1] * counts[top] < sums[top] * counts[top - 1]:
            sums[top - 1] += sums[top]
            counts[top - 1] += counts[top]
            top -= 1
            merges += 1
    out = np.empty(n)
    pos = 0
    for b in range(top + 1):
        mean = sums[b] / counts[b]
        for _ in range(counts[b]):
            out[pos] = mean
            pos += 1
    return out, merges


try:
    from numba import njit

    _pav_decreasing = njit(cache=True)(_pav_decreasing)
except ImportError:  # pragma: no cover - numba is a declared dependency
    pass


def _checked(v) -> np.ndarray:
    arr = np.ascontiguousarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("input must contain only finite values")
    return arr


def project_monotone_cone(v) -> np.ndarray:
    """Project v onto the cone of non-increasing vectors.

    Pool adjacent violators in one linear scan: every maximal violating run
    is pooled to its mean.  Already non-increasing input comes back as an
    unchanged copy, and the output sum always equals the input sum up to
    rounding.

    Parameters
    ----------
    v : array_like
        Finite 1-d input.

    Returns
    -------
    ndarray
        The closest non-increasing vector in the Euclidean sense.
    """
    out, _ = _pav_decreasing(_checked(v))
    return out


def project_monotone_cone_with_stats(v) -> tuple[np.ndarray, int]:
    """Same as project_monotone_cone, also returning the block merge count.

    The merge count never exceeds len(v) - 1.
    """
    out, merges = _pav_decreasing(_checked(v))
    return out, int(merges)


def project_monotone_nonneg_cone(v) -> np.ndarray:
    """Project v onto non-increasing, non-negative vectors.

    Equals clipping the monotone-cone projection at zero, exactly.
    """
    out, _ = _pav_decreasing(_checked(v))
    np.maximum(out, 0.0, out=out)
    return out

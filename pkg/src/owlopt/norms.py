"""Ordered weighted l1 (OWL) norms and their sorted-magnitude machinery.

The OWL norm of a vector v under a non-increasing, non-negative weight
vector w is the inner product of w with the magnitudes of v sorted in
non-increasing order.  Constant weights recover a scaled l1 norm; linearly
decaying (OSCAR) weights add a clustering penalty on top of sparsity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WeightVector",
    "OscarParams",
    "SignedSortDecomposition",
    "as_weights",
    "decompose",
    "recompose",
    "owl_norm",
    "dual_norm",
    "oscar_weights",
    "sort_invocations",
]

# Test instrumentation: every magnitude sort performed by this package goes
# through _count_sort, so callers can assert how many sorts a routine does.
_N_SORTS = 0


def sort_invocations() -> int:
    """Running count of magnitude sorts performed by this package."""
    return _N_SORTS


def _count_sort() -> None:
    global _N_SORTS
    _N_SORTS += 1


def _as_float_vector(v, name: str = "v", copy: bool = False) -> np.ndarray:
    arr = np.array(v, dtype=np.float64, copy=copy, order="C") if copy \
        else np.ascontiguousarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    return arr


class WeightVector:
    """Validated OWL weights: non-increasing, non-negative, first entry positive.

    Caches the prefix sums (atom scales and dual norms are built from them)
    and the arithmetic mean (the factor in the l1 lower bound).  The stored
    arrays are read-only.
    """

    __slots__ = ("w", "prefix_sums", "mean")

    def __init__(self, w):
        arr = _as_float_vector(w, "w", copy=True)
        if np.any(np.diff(arr) > 0):
            raise ValueError("weights must be non-increasing")
        if arr[-1] < 0:
            raise ValueError("weights must be non-negative")
        if arr[0] <= 0:
            raise ValueError("the leading weight must be positive")
        prefix = np.cumsum(arr)
        arr.flags.writeable = False
        prefix.flags.writeable = False
        self.w = arr
        self.prefix_sums = prefix
        self.mean = float(prefix[-1]) / arr.size

    def __len__(self) -> int:
        return self.w.size

    def __eq__(self, other) -> bool:
        return isinstance(other, WeightVector) and np.array_equal(self.w, other.w)

    def __repr__(self) -> str:
        return f"WeightVector({np.array2string(self.w, threshold=8)})"


def as_weights(w) -> WeightVector:
    """Pass a WeightVector through unchanged; validate anything else into one."""
    return w if isinstance(w, WeightVector) else WeightVector(w)


@dataclass(frozen=True)
class OscarParams:
    """OSCAR parameter pair: lambda1 scales l1, lambda2 the pairwise decay."""

    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not (np.isfinite(self.lambda1) and np.isfinite(self.lambda2)):
            raise ValueError("OSCAR parameters must be finite")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("OSCAR parameters must be non-negative")
        if self.lambda1 == 0 and self.lambda2 == 0:
            raise ValueError("OSCAR parameters must not both be zero")


def oscar_weights(params, n: int) -> WeightVector:
    """Linearly decaying weights w_i = lambda1 + lambda2 * (n - i), i = 1..n.

    Parameters
    ----------
    params : OscarParams or (lambda1, lambda2) pair
    n : int
        Number of weights.

    Returns
    -------
    WeightVector
    """
    if not isinstance(params, OscarParams):
        params = OscarParams(*params)
    if n < 1:
        raise ValueError("n must be at least 1")
    w = params.lambda1 + params.lambda2 * np.arange(n - 1, -1, -1, dtype=np.float64)
    return WeightVector(w)


@dataclass(frozen=True)
class SignedSortDecomposition:
    """Sign pattern plus the stable permutation sorting magnitudes descending.

    sorted_abs[k] equals abs(v)[perm[k]] and is non-increasing; signs[i] is
    -1, 0, or +1 matching v[i].  Ties keep the first occurrence first.
    """

    signs: np.ndarray
    perm: np.ndarray
    sorted_abs: np.ndarray


def decompose(v) -> SignedSortDecomposition:
    """Split v into signs and stably sorted magnitudes.

    Counts as one sort for the instrumentation counter.
    """
    v = _as_float_vector(v)
    a = np.abs(v)
    _count_sort()
    perm = np.argsort(-a, kind="stable")
    sorted_abs = a[perm]
    signs = np.sign(v)
    for arr in (signs, perm, sorted_abs):
        arr.flags.writeable = False
    return SignedSortDecomposition(signs=signs, perm=perm, sorted_abs=sorted_abs)


def recompose(dec: SignedSortDecomposition, sorted_values=None) -> np.ndarray:
    """Invert a decomposition: unsort sorted_values and reapply the signs.

    With the default sorted_values the original vector is recovered exactly.
    Positions whose sign is zero recompose to zero whatever the value.
    """
    t = dec.sorted_abs if sorted_values is None \
        else np.ascontiguousarray(sorted_values, dtype=np.float64)
    if t.shape != dec.sorted_abs.shape:
        raise ValueError(
            f"sorted_values has shape {t.shape}, expected {dec.sorted_abs.shape}")
    out = np.empty(t.size, dtype=np.float64)
    out[dec.perm] = t
    out *= dec.signs
    return out


def _sorted_magnitudes(v: np.ndarray) -> np.ndarray:
    """Magnitudes of v in non-increasing order; one counted sort."""
    _count_sort()
    return np.sort(np.abs(v))[::-1]


def owl_norm(v, w) -> float:
    """OWL norm: inner product of w with the magnitudes of v sorted descending.

    Parameters
    ----------
    v : array_like
        Input vector, same length as the weights.
    w : WeightVector or array_like
        Non-increasing, non-negative weights, leading weight positive.

    Returns
    -------
    float
    """
    w = as_weights(w)
    v = _as_float_vector(v)
    if v.size != len(w):
        raise ValueError(f"v has length {v.size}, weights have length {len(w)}")
    return float(np.dot(w.w, _sorted_magnitudes(v)))


def dual_norm(v, w) -> float:
    """Dual OWL norm: max over i of (sum of i largest magnitudes) / (w_1 + .. + w_i).

    Upper-bounded by the largest magnitude divided by the mean weight, which
    makes it usable as a root-finding bracket for ball projections.
    """
    w = as_weights(w)
    v = _as_float_vector(v)
    if v.size != len(w):
        raise ValueError(f"v has length {v.size}, weights have length {len(w)}")
    u = _sorted_magnitudes(v)
    return float(np.max(np.cumsum(u) / w.prefix_sums))

"""Independent reference implementations used only by the tests.

Everything here is deliberately written a different way than the package:
convex-programming solves where the package uses closed forms, exhaustive
enumeration where the package uses stack algorithms, plain Python loops
where the package vectorizes.  Agreement between the two routes is the
point.
"""

from __future__ import annotations

import itertools

import numpy as np

# Interior-point settings that push Clarabel well past the comparison
# tolerances used in the tests (worst observed error ~5e-10 on prox
# instances, ~2e-12 feasibility on projections).
CLARABEL_TIGHT = dict(
    tol_gap_abs=1e-12,
    tol_gap_rel=1e-12,
    tol_feas=1e-12,
    tol_ktratio=1e-9,
    max_iter=200,
)


def naive_owl(v, w) -> float:
    """Weighted sorted-magnitude sum, by plain Python sorting."""
    mags = sorted((abs(float(t)) for t in v), reverse=True)
    return float(sum(wi * mi for wi, mi in zip(w, mags, strict=True)))


def naive_dual(v, w) -> float:
    """max_i (sum of i largest magnitudes) / (w_1 + ... + w_i), by loops."""
    mags = sorted((abs(float(t)) for t in v), reverse=True)
    best = -np.inf
    top = 0.0
    bottom = 0.0
    for wi, mi in zip(w, mags, strict=True):
        top += mi
        bottom += float(wi)
        if bottom > 0:
            best = max(best, top / bottom)
    return best


def soft_threshold(v, t: float) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def _owl_expr(x, w):
    """DCP expression of the weighted sorted-magnitude norm.

    Abel summation: with delta_i = w_i - w_{i+1} >= 0 (delta_n = w_n), the
    norm equals sum_i delta_i * (sum of the i largest magnitudes), a
    non-negative combination of convex sum_largest terms.
    """
    import cvxpy as cp

    w = np.asarray(w, dtype=np.float64)
    delta = np.append(w[:-1] - w[1:], w[-1])
    terms = [delta[i] * cp.sum_largest(cp.abs(x), i + 1)
             for i in range(w.size) if delta[i] > 0]
    if not terms:
        return cp.Constant(0.0)
    return sum(terms)


def cvx_prox(v, w, theta: float) -> np.ndarray:
    """argmin_x 0.5 ||x - v||^2 + theta * owl(x), by interior point."""
    import cvxpy as cp

    v = np.asarray(v, dtype=np.float64)
    x = cp.Variable(v.size)
    prob = cp.Problem(cp.Minimize(
        0.5 * cp.sum_squares(x - v) + theta * _owl_expr(x, w)))
    prob.solve(solver=cp.CLARABEL, **CLARABEL_TIGHT)
    if prob.status != "optimal":
        raise RuntimeError(f"prox oracle status {prob.status}")
    return np.asarray(x.value, dtype=np.float64)


def cvx_project(v, w, epsilon: float) -> np.ndarray:
    """argmin_x 0.5 ||x - v||^2 subject to owl(x) <= epsilon."""
    import cvxpy as cp

    v = np.asarray(v, dtype=np.float64)
    x = cp.Variable(v.size)
    prob = cp.Problem(cp.Minimize(0.5 * cp.sum_squares(x - v)),
                      [_owl_expr(x, w) <= epsilon])
    prob.solve(solver=cp.CLARABEL, **CLARABEL_TIGHT)
    if prob.status != "optimal":
        raise RuntimeError(f"projection oracle status {prob.status}")
    return np.asarray(x.value, dtype=np.float64)


def exact_monotone_projection(v) -> np.ndarray:
    """Projection onto the non-increasing cone by exhaustive KKT search.

    Tries every way of gluing adjacent coordinates into constant blocks
    (2**(n-1) of them).  A candidate is the projection iff its block means
    are non-increasing and the stationarity multipliers
    mu_j = sum_{t <= j} (x_t - v_t) are all non-negative; uniqueness of the
    projection makes the first hit the answer.  Exponential, tests only.
    """
    v = np.asarray(v, dtype=np.float64)
    n = v.size
    if n == 1:
        return v.copy()
    for glued in itertools.product((True, False), repeat=n - 1):
        bounds = [0] + [i + 1 for i in range(n - 1) if not glued[i]] + [n]
        x = np.empty(n)
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            x[lo:hi] = v[lo:hi].mean()
        if np.any(np.diff(x) > 1e-12):
            continue
        mu = np.cumsum(x - v)[:-1]
        if np.all(mu >= -1e-9):
            return x
    raise RuntimeError("no KKT point found (numerical ties?)")


def project_l1_ball(v, radius: float) -> np.ndarray:
    """Euclidean projection onto the l1 ball, by sorting and thresholding."""
    v = np.asarray(v, dtype=np.float64)
    a = np.abs(v)
    if a.sum() <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    cs = np.cumsum(u)
    k = np.nonzero(u * np.arange(1, v.size + 1) > cs - radius)[0][-1]
    tau = (cs[k] - radius) / (k + 1.0)
    return np.sign(v) * np.maximum(a - tau, 0.0)


def project_linf_ball(v, radius: float) -> np.ndarray:
    """Euclidean projection onto the l-infinity ball (coordinate clip)."""
    return np.clip(np.asarray(v, dtype=np.float64), -radius, radius)


def random_weights(rng, n: int, allow_zero_tail: bool = True) -> np.ndarray:
    """Random valid weight vector: non-increasing, non-negative, w_1 > 0."""
    w = np.sort(rng.uniform(0.0, 2.0, size=n))[::-1]
    w[0] += 0.1
    if allow_zero_tail and n > 1 and rng.random() < 0.25:
        w[rng.integers(1, n):] = 0.0
    return w

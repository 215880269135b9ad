"""Proximity operator of the OWL norm and Euclidean projection onto its ball.

Both routines share the same skeleton: split off signs, sort magnitudes
once, solve a monotone-cone problem in the sorted domain, then undo the
sort and signs.  The ball projection additionally finds the multiplier on
the weight direction by bracketed scalar root finding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .isotonic import _pav_decreasing, project_monotone_nonneg_cone
from .norms import WeightVector, _as_float_vector, as_weights, decompose, recompose

__all__ = [
    "OwlBall",
    "RootFindConfig",
    "RootFindResult",
    "RootFindError",
    "ProjectionInfo",
    "prox_owl",
    "eval_g",
    "find_root",
    "project_owl_ball",
]

_EPS = float(np.finfo(np.float64).eps)

# Below this dimension the exact dual norm is cheap relative to the solve,
# so the root bracket is tightened to it.
_DUAL_TIGHTEN_MAX_N = 10_000

_FEASIBILITY_RTOL = 1e-8


class RootFindError(RuntimeError):
    """Raised when the bracketed root solve cannot certify its answer."""


@dataclass(frozen=True)
class OwlBall:
    """OWL-norm ball: the set of vectors with owl_norm(x, weights) <= radius."""

    weights: WeightVector
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "weights", as_weights(self.weights))
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("ball radius must be positive and finite")

    @property
    def dim(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class RootFindConfig:
    """Stopping control for bracketed scalar root finding.

    tol_theta is an absolute bracket-width tolerance, tol_g an absolute
    tolerance on the function value; either one stops the solve.
    """

    tol_theta: float
    tol_g: float
    max_iter: int = 200

    def __post_init__(self):
        if not (np.isfinite(self.tol_theta) and self.tol_theta > 0):
            raise ValueError("tol_theta must be positive and finite")
        if not (np.isfinite(self.tol_g) and self.tol_g > 0):
            raise ValueError("tol_g must be positive and finite")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class RootFindResult:
    """Root estimate with its certificate.

    residual is the function value at root; bracket_lo and bracket_hi frame
    the final sign-changing interval, whose width flags nearly flat spans.
    """

    root: float
    residual: float
    iterations: int
    converged: bool
    bracket_lo: float
    bracket_hi: float


@dataclass(frozen=True)
class ProjectionInfo:
    """Diagnostics of one ball projection."""

    theta: float
    iterations: int
    residual: float
    interior: bool
    bracket_width: float


def prox_owl(v, w, theta: float) -> np.ndarray:
    """Proximity operator of theta times the OWL norm.

    Sorts the magnitudes of v, shifts them by theta * w, projects onto the
    non-increasing non-negative cone, and undoes the sort and signs.  Costs
    one sort plus linear work.  With constant weights this reduces to soft
    thresholding at theta * w[0].

    Parameters
    ----------
    v : array_like
        Input vector.
    w : WeightVector or array_like
        OWL weights of the same length.
    theta : float
        Non-negative scale; theta = 0 returns a copy of v.

    Returns
    -------
    ndarray
    """
    w = as_weights(w)
    v = _as_float_vector(v)
    if v.size != len(w):
        raise ValueError(f"v has length {v.size}, weights have length {len(w)}")
    if not (np.isfinite(theta) and theta >= 0):
        raise ValueError("theta must be non-negative and finite")
    if theta == 0.0:
        return v.copy()
    dec = decompose(v)
    t = project_monotone_nonneg_cone(dec.sorted_abs - theta * w.w)
    return recompose(dec, t)


def _shifted_norm_gap(theta: float, u: np.ndarray, w_arr: np.ndarray,
                      radius: float) -> float:
    # OWL norm of the cone projection of u - theta * w, minus the radius.
    t, _ = _pav_decreasing(u - theta * w_arr)
    np.maximum(t, 0.0, out=t)
    return float(np.dot(w_arr, t)) - radius


def eval_g(theta: float, u, ball: OwlBall) -> float:
    """Ball-residual function driving the projection root solve.

    u must hold non-increasingly sorted, non-negative magnitudes.  Returns
    the OWL norm of the cone projection of u - theta * w minus the ball
    radius; continuous and non-increasing in theta, equal to minus the
    radius once theta reaches the dual norm of u.
    """
    u = _as_float_vector(u, "u")
    if u.size != ball.dim:
        raise ValueError(f"u has length {u.size}, ball has dimension {ball.dim}")
    if np.any(np.diff(u) > 0) or u[-1] < 0:
        raise ValueError("u must be non-increasing and non-negative")
    if not np.isfinite(theta):
        raise ValueError("theta must be finite")
    return _shifted_norm_gap(float(theta), u, ball.weights.w, ball.radius)


def find_root(g, lo: float, hi: float, config: RootFindConfig) -> RootFindResult:
    """Bracketed scalar root solve by Brent's method.

    Requires g(lo) >= 0 >= g(hi).  Mixes bisection with secant and inverse
    quadratic interpolation and never evaluates g outside [lo, hi].  Stops
    once |g| <= tol_g or the bracket narrows below tol_theta.  When the
    iteration budget runs out, the midpoint of the final bracket is
    returned with converged = False.

    Parameters
    ----------
    g : callable
        Scalar function of one float.
    lo, hi : float
        Bracket endpoints, lo <= hi.
    config : RootFindConfig

    Returns
    -------
    RootFindResult
    """
    lo = float(lo)
    hi = float(hi)
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
        raise ValueError(f"invalid bracket [{lo}, {hi}]")
    fa = float(g(lo))
    fb = float(g(hi))
    if fa < 0 or fb > 0:
        raise ValueError(
            f"invalid bracket: g({lo}) = {fa}, g({hi}) = {fb}; "
            "need g(lo) >= 0 >= g(hi)")
    if abs(fa) <= config.tol_g:
        return RootFindResult(root=lo, residual=fa, iterations=0,
                              converged=True, bracket_lo=lo, bracket_hi=hi)

    a, b, c = lo, hi, lo
    fc = fa
    d = e = b - a
    evals = 0
    for _ in range(config.max_iter):
        if (fb > 0 and fc > 0) or (fb < 0 and fc < 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * _EPS * abs(b) + 0.5 * config.tol_theta
        xm = 0.5 * (c - b)
        if fb == 0.0 or abs(fb) <= config.tol_g or abs(xm) <= tol1:
            return RootFindResult(root=b, residual=fb, iterations=evals,
                                  converged=True,
                                  bracket_lo=min(b, c), bracket_hi=max(b, c))
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            # interpolation step: secant when a == c, inverse quadratic otherwise
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = float(g(b))
        evals += 1
    blo, bhi = min(b, c), max(b, c)
    mid = 0.5 * (blo + bhi)
    return RootFindResult(root=mid, residual=fb, iterations=evals,
                          converged=False, bracket_lo=blo, bracket_hi=bhi)


def project_owl_ball(v, ball: OwlBall, config: RootFindConfig | None = None,
                     return_info: bool = False):
    """Euclidean projection onto an OWL-norm ball.

    Points already inside or on the ball come back as an exact copy.
    Otherwise the multiplier theta* at which the shifted norm meets the
    radius is bracketed in [0, largest magnitude / mean weight] (tightened
    to the exact dual norm in small dimensions) and solved by find_root.
    The whole projection performs exactly one magnitude sort.

    Parameters
    ----------
    v : array_like
        Point to project.
    ball : OwlBall
    config : RootFindConfig, optional
        Defaults to tol_theta = 64 eps * bracket width, tol_g = 1e-12 * radius,
        200 iterations.
    return_info : bool
        When true, also return a ProjectionInfo record.

    Returns
    -------
    ndarray, or (ndarray, ProjectionInfo) when return_info is set.

    Raises
    ------
    RootFindError
        If the root solve does not converge, or the result misses the ball
        boundary by more than 1e-8 * max(radius, 1).
    """
    w = ball.weights
    v = _as_float_vector(v)
    if v.size != len(w):
        raise ValueError(f"v has length {v.size}, ball has dimension {ball.dim}")
    eps = ball.radius
    dec = decompose(v)  # the single sort of this routine
    u = dec.sorted_abs
    norm_v = float(np.dot(w.w, u))
    if norm_v <= eps:
        info = ProjectionInfo(theta=0.0, iterations=0, residual=norm_v - eps,
                              interior=True, bracket_width=0.0)
        x = v.copy()
        return (x, info) if return_info else x

    hi = float(u[0]) / w.mean
    if v.size <= _DUAL_TIGHTEN_MAX_N:
        # u is already sorted, so the exact dual norm costs one cumulative sum
        hi = min(hi, float(np.max(np.cumsum(u) / w.prefix_sums)))
    if config is None:
        # resolve theta essentially to machine precision: solvers that
        # compare residuals of successive projected iterates need the
        # projection noise floor well below their acceptance increments
        config = RootFindConfig(tol_theta=64.0 * _EPS * hi, tol_g=1e-12 * eps)

    w_arr = w.w
    result = find_root(lambda th: _shifted_norm_gap(th, u, w_arr, eps),
                       0.0, hi, config)
    feas_tol = _FEASIBILITY_RTOL * max(eps, 1.0)
    if not result.converged or abs(result.residual) > feas_tol:
        raise RootFindError(
            f"projection root solve failed: residual {result.residual:.3e} after "
            f"{result.iterations} iterations, bracket "
            f"[{result.bracket_lo:.6e}, {result.bracket_hi:.6e}]")

    t, _ = _pav_decreasing(u - result.root * w_arr)
    np.maximum(t, 0.0, out=t)
    x = recompose(dec, t)
    info = ProjectionInfo(theta=result.root, iterations=result.iterations,
                          residual=result.residual, interior=False,
                          bracket_width=result.bracket_hi - result.bracket_lo)
    return (x, info) if return_info else x

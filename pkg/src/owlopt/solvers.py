"""First-order solvers for OWL-regularized least squares.

Two problem shapes share the machinery: the penalized form
0.5 * ||y - H x||^2 + tau * owl_norm(x) (Tikhonov) and the ball-constrained
form min 0.5 * ||y - H x||^2 subject to owl_norm(x) <= epsilon (Ivanov).
Conditional gradient handles the constrained form through the atomic linear
oracle; SpaRSA and FISTA handle both through the proximity operator or the
ball projection.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .atoms import linear_oracle
from .norms import WeightVector, _as_float_vector, as_weights
from .proximal import OwlBall, project_owl_ball, prox_owl

__all__ = [
    "LinearMap",
    "as_linear_map",
    "RegressionProblem",
    "Tikhonov",
    "Ivanov",
    "SolverConfig",
    "SolverTrace",
    "SolverError",
    "PowerIterationResult",
    "power_iteration",
    "estimate_lipschitz",
    "duality_gap",
    "cg_step_size",
    "theorem2_bound",
    "cg_solve",
    "sparsa_solve",
    "fista_solve",
]

_TINY = float(np.finfo(np.float64).tiny)
_EPS = float(np.finfo(np.float64).eps)

# Cached matrix-vector products drift over very long runs; refresh this often.
_REFRESH_EVERY = 512


class SolverError(RuntimeError):
    """Raised when a solver cannot continue (for example a stuck inner loop)."""


class LinearMap:
    """Matrix-free linear operator: a shape plus matvec / rmatvec callables."""

    __slots__ = ("shape", "matvec", "rmatvec")

    def __init__(self, shape, matvec: Callable, rmatvec: Callable):
        m, n = shape
        if m < 1 or n < 1:
            raise ValueError(f"invalid operator shape {shape!r}")
        self.shape = (int(m), int(n))
        self.matvec = matvec
        self.rmatvec = rmatvec

    @classmethod
    def from_matrix(cls, H) -> "LinearMap":
        H = np.ascontiguousarray(H, dtype=np.float64)
        if H.ndim != 2:
            raise ValueError(f"expected a 2-d matrix, got shape {H.shape}")
        if not np.all(np.isfinite(H)):
            raise ValueError("matrix must contain only finite values")
        return cls(H.shape, lambda x: H @ x, lambda r: H.T @ r)


def as_linear_map(H) -> LinearMap:
    """Wrap a matrix or a duck-typed operator into a LinearMap."""
    if isinstance(H, LinearMap):
        return H
    if hasattr(H, "matvec") and hasattr(H, "rmatvec") and hasattr(H, "shape"):
        return LinearMap(tuple(H.shape), H.matvec, H.rmatvec)
    return LinearMap.from_matrix(H)


class RegressionProblem:
    """Least-squares data term 0.5 * ||y - H x||^2 behind an abstract operator.

    The squared-spectral-norm (Lipschitz) estimate is computed on first use
    and cached; pass lipschitz to pin it instead.
    """

    __slots__ = ("op", "y", "_lipschitz")

    def __init__(self, H, y, lipschitz: float | None = None):
        self.op = as_linear_map(H)
        y = _as_float_vector(y, "y", copy=True)
        if y.size != self.op.shape[0]:
            raise ValueError(
                f"y has length {y.size}, operator has {self.op.shape[0]} rows")
        y.flags.writeable = False
        self.y = y
        self._lipschitz = None if lipschitz is None else float(lipschitz)

    @property
    def m(self) -> int:
        return self.op.shape[0]

    @property
    def n(self) -> int:
        return self.op.shape[1]

    @property
    def lipschitz(self) -> float:
        if self._lipschitz is None:
            self._lipschitz = estimate_lipschitz(self.op)
        return self._lipschitz

    def objective(self, x) -> float:
        r = self.y - self.op.matvec(np.asarray(x, dtype=np.float64))
        return 0.5 * float(r @ r)


@dataclass(frozen=True)
class PowerIterationResult:
    """Largest-eigenvalue estimate with its relative residual certificate."""

    value: float
    residual: float
    iterations: int


def power_iteration(H, tol: float = 1e-6, max_iter: int = 5000,
                    seed: int = 0) -> PowerIterationResult:
    """Estimate the largest eigenvalue of H^T H by power iteration.

    Iterates v <- H^T H v with normalization from a seeded random start and
    stops when the eigen-residual ||H^T H v - value * v|| falls below
    tol * value.  The reported residual is that ratio.

    Parameters
    ----------
    H : matrix or LinearMap
    tol : float
        Relative residual target.
    max_iter : int
    seed : int
        Start-vector seed; fixed by default so runs are deterministic.

    Returns
    -------
    PowerIterationResult
    """
    op = as_linear_map(H)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.shape[1])
    v /= np.linalg.norm(v)
    value = 0.0
    rel = math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        z = op.rmatvec(op.matvec(v))
        value = float(v @ z)  # Rayleigh quotient, v is a unit vector
        nz = float(np.linalg.norm(z))
        if nz == 0.0:
            return PowerIterationResult(0.0, 0.0, iterations)
        rel = float(np.linalg.norm(z - value * v)) / max(value, _TINY)
        if rel <= tol:
            break
        v = z / nz
    return PowerIterationResult(value, rel, iterations)


def estimate_lipschitz(H, tol: float = 1e-6, max_iter: int = 5000,
                       seed: int = 0) -> float:
    """Certified power-iteration estimate of the largest eigenvalue of H^T H."""
    return power_iteration(H, tol=tol, max_iter=max_iter, seed=seed).value


@dataclass(frozen=True)
class Tikhonov:
    """Penalized formulation: data term plus tau times the OWL norm."""

    tau: float
    weights: WeightVector

    def __post_init__(self):
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError("tau must be positive and finite")
        object.__setattr__(self, "weights", as_weights(self.weights))


@dataclass(frozen=True)
class Ivanov:
    """Constrained formulation: data term subject to an OWL-ball bound."""

    ball: OwlBall

    def __post_init__(self):
        if not isinstance(self.ball, OwlBall):
            raise TypeError("Ivanov expects an OwlBall")


_STOPPING_CHOICES = ("auto", "duality-gap", "rel-change", "max-iterations")


@dataclass
class SolverConfig:
    """Iteration budget, stopping rule, and step-size safeguards.

    stopping 'auto' selects the natural certificate: duality gap for
    conditional gradient, relative iterate change for SpaRSA and FISTA.
    When x_ref is set, traces record the distance to it, and a positive
    dist_target stops the run once the distance falls below it.
    """

    stop_tol: float = 1e-8
    max_iter: int = 100_000
    stopping: str = "auto"
    eta: float = 2.0
    alpha0: float = 1.0
    alpha_min: float = 1e-30
    alpha_max: float = 1e30
    max_backtracks: int = 60
    x0: np.ndarray | None = None
    x_ref: np.ndarray | None = None
    dist_target: float = 0.0
    callback: Callable[[int, np.ndarray], None] | None = None

    def __post_init__(self):
        if not (np.isfinite(self.stop_tol) and self.stop_tol >= 0):
            raise ValueError("stop_tol must be non-negative and finite")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.stopping not in _STOPPING_CHOICES:
            raise ValueError(f"stopping must be one of {_STOPPING_CHOICES}")
        if not (np.isfinite(self.eta) and self.eta > 1):
            raise ValueError("eta must exceed 1")
        if not (np.isfinite(self.alpha0) and self.alpha0 > 0):
            raise ValueError("alpha0 must be positive and finite")
        if not (0 < self.alpha_min < self.alpha_max):
            raise ValueError("need 0 < alpha_min < alpha_max")
        if self.max_backtracks < 1:
            raise ValueError("max_backtracks must be at least 1")
        if self.dist_target < 0:
            raise ValueError("dist_target must be non-negative")


@dataclass
class SolverTrace:
    """Per-iteration history, one row per recorded iterate.

    f is the least-squares data term 0.5 * ||H x - y||^2, the objective of
    the ball-constrained form (penalized runs track the same quantity).
    certificate holds the duality gap for conditional gradient and the
    relative iterate change otherwise; step holds the line-search step for
    conditional gradient and the inverse step alpha otherwise.  extras may
    carry solver-specific series such as dist_to_ref, residual (SpaRSA),
    or bt_slack (backtracking FISTA).
    """

    k: np.ndarray
    f: np.ndarray
    certificate: np.ndarray
    step: np.ndarray
    backtracks: np.ndarray
    time_s: np.ndarray
    extras: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return self.k.size

    def to_csv(self, path) -> None:
        """Write the pinned columns k,f,certificate,step,backtracks,time_s."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "f", "certificate", "step", "backtracks", "time_s"])
            for row in zip(self.k, self.f, self.certificate, self.step,
                           self.backtracks, self.time_s):
                writer.writerow([int(row[0]), repr(float(row[1])),
                                 repr(float(row[2])), repr(float(row[3])),
                                 int(row[4]), repr(float(row[5]))])


class _TraceBuilder:
    def __init__(self, extra_names=()):
        self.rows = {name: [] for name in
                     ("k", "f", "certificate", "step", "backtracks", "time_s")}
        self.extras = {name: [] for name in extra_names}

    def add(self, k, f, certificate, step, backtracks, time_s, **extra):
        rows = self.rows
        rows["k"].append(k)
        rows["f"].append(f)
        rows["certificate"].append(certificate)
        rows["step"].append(step)
        rows["backtracks"].append(backtracks)
        rows["time_s"].append(time_s)
        for name, value in extra.items():
            self.extras[name].append(value)

    def build(self) -> SolverTrace:
        rows = self.rows
        return SolverTrace(
            k=np.asarray(rows["k"], dtype=np.int64),
            f=np.asarray(rows["f"], dtype=np.float64),
            certificate=np.asarray(rows["certificate"], dtype=np.float64),
            step=np.asarray(rows["step"], dtype=np.float64),
            backtracks=np.asarray(rows["backtracks"], dtype=np.int64),
            time_s=np.asarray(rows["time_s"], dtype=np.float64),
            extras={name: np.asarray(vals, dtype=np.float64)
                    for name, vals in self.extras.items()},
        )


def duality_gap(d, g) -> float:
    """Surrogate duality gap d @ g, clipped at zero against rounding.

    With d = s - x for s from the linear oracle at g (the negative
    gradient), this upper bounds f(x) - f(x*) over the ball.
    """
    return max(float(np.dot(d, g)), 0.0)


def _cg_step_from_products(dg: float, Hd: np.ndarray) -> float:
    denom = float(Hd @ Hd)
    if denom == 0.0:
        # the objective is linear along d: full step only if it improves
        return 1.0 if dg > 0 else 0.0
    return min(1.0, max(0.0, dg / denom))


def cg_step_size(d, g, H) -> float:
    """Exact line-search step for the least-squares term, clipped to [0, 1].

    d is the direction toward the oracle point, g the negative gradient
    at the current iterate, H the design operator.
    """
    op = as_linear_map(H)
    d = np.asarray(d, dtype=np.float64)
    return _cg_step_from_products(float(np.dot(d, g)), op.matvec(d))


def theorem2_bound(k: int, epsilon: float, lipschitz: float,
                   mean_weight: float) -> float:
    """A priori suboptimality bound for conditional gradient at iteration k.

    Equals 8 * epsilon**2 * lipschitz / (mean_weight**2 * (k + 2)): the
    curvature constant of the least-squares term over the ball, divided by
    the usual k + 2 sublinear factor.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if epsilon <= 0 or lipschitz <= 0 or mean_weight <= 0:
        raise ValueError("epsilon, lipschitz, and mean_weight must be positive")
    return 8.0 * epsilon * epsilon * lipschitz / (mean_weight * mean_weight * (k + 2))


def _unwrap_ball(reg) -> OwlBall:
    if isinstance(reg, OwlBall):
        return reg
    if isinstance(reg, Ivanov):
        return reg.ball
    raise TypeError("conditional gradient needs the ball-constrained (Ivanov) "
                    f"formulation, got {type(reg).__name__}")


def _prox_step(reg):
    """Return (step(v, alpha), needs_feasible_start) for a formulation."""
    if isinstance(reg, OwlBall):
        reg = Ivanov(reg)
    if isinstance(reg, Ivanov):
        ball = reg.ball
        return (lambda v, alpha: project_owl_ball(v, ball)), True
    if isinstance(reg, Tikhonov):
        tau, w = reg.tau, reg.weights
        return (lambda v, alpha: prox_owl(v, w, tau / alpha)), False
    raise TypeError(f"reg must be Tikhonov or Ivanov, got {type(reg).__name__}")


def _initial_point(config: SolverConfig, n: int, ball: OwlBall | None) -> np.ndarray:
    if config.x0 is None:
        return np.zeros(n)
    x = _as_float_vector(config.x0, "x0", copy=True)
    if x.size != n:
        raise ValueError(f"x0 has length {x.size}, problem has {n} columns")
    if ball is not None and np.any(x):
        x = project_owl_ball(x, ball)
    return x


def _check_x_ref(config: SolverConfig, n: int) -> np.ndarray | None:
    if config.x_ref is None:
        return None
    x_ref = _as_float_vector(config.x_ref, "x_ref")
    if x_ref.size != n:
        raise ValueError(f"x_ref has length {x_ref.size}, problem has {n} columns")
    return x_ref


def _rel_change(x_new: np.ndarray, x_old: np.ndarray) -> float:
    num = float(np.linalg.norm(x_new - x_old))
    den = float(np.linalg.norm(x_old))
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def _resolve_stopping(config: SolverConfig, solver: str) -> str:
    mode = config.stopping
    if mode == "auto":
        return "duality-gap" if solver == "cg" else "rel-change"
    if solver == "cg" and mode == "rel-change":
        raise ValueError("conditional gradient stops on the duality gap, "
                         "not on iterate change")
    if solver != "cg" and mode == "duality-gap":
        raise ValueError(f"{solver} computes no duality gap; stop on "
                         "rel-change or max-iterations")
    return mode


def cg_solve(problem: RegressionProblem, ball, config: SolverConfig | None = None
             ) -> tuple[np.ndarray, SolverTrace]:
    """Conditional gradient (Frank-Wolfe) over an OWL ball.

    Each iteration calls the atomic linear oracle at the negative gradient,
    takes the exact line-search step clipped to [0, 1], and records the
    surrogate duality gap, an upper bound on the current suboptimality.
    Stops once the gap falls below stop_tol.  Every iterate is feasible.

    Parameters
    ----------
    problem : RegressionProblem
    ball : OwlBall or Ivanov
    config : SolverConfig, optional

    Returns
    -------
    (x, trace)
    """
    config = config if config is not None else SolverConfig()
    ball = _unwrap_ball(ball)
    stopping = _resolve_stopping(config, "cg")
    op, y = problem.op, problem.y
    n = op.shape[1]
    if ball.dim != n:
        raise ValueError(f"ball has dimension {ball.dim}, problem has {n} columns")
    x_ref = _check_x_ref(config, n)
    x = _initial_point(config, n, ball)

    extra_names = ("dist_to_ref",) if x_ref is not None else ()
    builder = _TraceBuilder(extra_names)
    t0 = time.perf_counter()
    Hx = op.matvec(x)
    for k in range(config.max_iter + 1):
        if k and k % _REFRESH_EVERY == 0:
            Hx = op.matvec(x)
        r = y - Hx
        f = 0.5 * float(r @ r)
        neg_grad = op.rmatvec(r)
        s = linear_oracle(neg_grad, ball)
        d = s - x
        gap = duality_gap(d, neg_grad)
        extra = {}
        dist = None
        if x_ref is not None:
            dist = float(np.linalg.norm(x - x_ref))
            extra["dist_to_ref"] = dist
        elapsed = time.perf_counter() - t0
        hit_target = dist is not None and config.dist_target > 0 \
            and dist <= config.dist_target
        done = (k == config.max_iter or hit_target
                or (stopping == "duality-gap" and gap <= config.stop_tol))
        if done:
            builder.add(k, f, gap, 0.0, 0, elapsed, **extra)
            if config.callback is not None:
                config.callback(k, x)
            break
        Hd = op.matvec(d)
        gamma = _cg_step_from_products(gap, Hd)
        builder.add(k, f, gap, gamma, 0, elapsed, **extra)
        if config.callback is not None:
            config.callback(k, x)
        x = x + gamma * d
        Hx = Hx + gamma * Hd
    return x, builder.build()


def sparsa_solve(problem: RegressionProblem, reg, config: SolverConfig | None = None
                 ) -> tuple[np.ndarray, SolverTrace]:
    """Spectral proximal gradient with Barzilai-Borwein steps (SpaRSA).

    The curvature estimate ||H dx||^2 / ||dx||^2 is safeguarded to
    [alpha_min, alpha_max]; a degenerate quotient (dx = 0, or a numerator
    at the rounding scale of the cached products) reuses the previous
    alpha.  Each outer iteration inflates alpha by eta until the
    residual norm does not increase, so accepted residuals are
    non-increasing (recorded under extras['residual']).  Works for both the
    penalized and the ball-constrained formulation.

    Parameters
    ----------
    problem : RegressionProblem
    reg : Tikhonov, Ivanov, or OwlBall
    config : SolverConfig, optional

    Returns
    -------
    (x, trace)
    """
    config = config if config is not None else SolverConfig()
    stopping = _resolve_stopping(config, "sparsa")
    step_fn, needs_feasible = _prox_step(reg)
    op, y = problem.op, problem.y
    n = op.shape[1]
    x_ref = _check_x_ref(config, n)
    ball = reg.ball if isinstance(reg, Ivanov) else (reg if isinstance(reg, OwlBall) else None)
    x_prev = _initial_point(config, n, ball if needs_feasible else None)

    extra_names = ["residual"]
    if x_ref is not None:
        extra_names.append("dist_to_ref")
    builder = _TraceBuilder(tuple(extra_names))
    t0 = time.perf_counter()

    def record(k, x, res, alpha, bt, cert):
        extra = {"residual": res}
        dist = None
        if x_ref is not None:
            dist = float(np.linalg.norm(x - x_ref))
            extra["dist_to_ref"] = dist
        builder.add(k, 0.5 * res * res, cert, alpha, bt,
                    time.perf_counter() - t0, **extra)
        if config.callback is not None:
            config.callback(k, x)
        return dist

    alpha = config.alpha0
    Hx_prev = op.matvec(x_prev)
    r_prev = Hx_prev - y
    record(0, x_prev, float(np.linalg.norm(r_prev)), alpha, 0, math.nan)

    # initialization step: one proximal step from x0, no acceptance test
    x = step_fn(x_prev - op.rmatvec(r_prev) / alpha, alpha)
    Hx = op.matvec(x)
    r = Hx - y
    k = 1
    rel = _rel_change(x, x_prev)
    dist = record(1, x, float(np.linalg.norm(r)), alpha, 0, rel)
    while k < config.max_iter:
        if (stopping == "rel-change" and rel <= config.stop_tol) or \
                (dist is not None and config.dist_target > 0
                 and dist <= config.dist_target):
            break
        dx = x - x_prev
        nd2 = float(dx @ dx)
        if nd2 > 0.0:
            Hdx = Hx - Hx_prev  # cached products, no extra matvec
            hd2 = float(Hdx @ Hdx)
            noise = _EPS * (float(np.linalg.norm(Hx))
                            + float(np.linalg.norm(Hx_prev)))
            if hd2 > (64.0 * noise) ** 2:
                alpha = min(max(hd2 / nd2, config.alpha_min),
                            config.alpha_max)
            # a numerator at rounding scale carries no curvature
            # information: keep the previous alpha, as for dx = 0
        # else: keep the previous alpha
        res_cur = float(np.linalg.norm(r))
        grad = op.rmatvec(r)
        bt = 0
        while True:
            x_new = step_fn(x - grad / alpha, alpha)
            Hx_new = op.matvec(x_new)
            r_new = Hx_new - y
            res_new = float(np.linalg.norm(r_new))
            if res_new <= res_cur:
                break
            alpha *= config.eta
            bt += 1
            if bt > config.max_backtracks:
                raise SolverError(
                    f"sparsa: residual test still failing after "
                    f"{config.max_backtracks} step inflations at iteration {k}")
        k += 1
        rel = _rel_change(x_new, x)
        x_prev, x = x, x_new
        Hx_prev, Hx = Hx, Hx_new
        r = r_new
        dist = record(k, x, res_new, alpha, bt, rel)
    return x, builder.build()


def fista_solve(problem: RegressionProblem, reg, config: SolverConfig | None = None,
                backtracking: bool = True) -> tuple[np.ndarray, SolverTrace]:
    """Accelerated proximal gradient (FISTA), optionally with backtracking.

    Without backtracking the inverse step alpha is pinned to the problem's
    Lipschitz estimate.  With backtracking alpha starts at alpha0, never
    decreases, and carries over across iterations; a trial point is
    accepted once its squared residual is at most the quadratic model
    Q(x, u) = ||H u - y||^2 + 2 (x - u) @ grad + (alpha / 2) * ||x - u||^2,
    and the slack Q - ||H x - y||^2 is recorded under extras['bt_slack'].

    Parameters
    ----------
    problem : RegressionProblem
    reg : Tikhonov, Ivanov, or OwlBall
    config : SolverConfig, optional
    backtracking : bool

    Returns
    -------
    (x, trace)
    """
    config = config if config is not None else SolverConfig()
    stopping = _resolve_stopping(config, "fista")
    step_fn, needs_feasible = _prox_step(reg)
    op, y = problem.op, problem.y
    n = op.shape[1]
    x_ref = _check_x_ref(config, n)
    ball = reg.ball if isinstance(reg, Ivanov) else (reg if isinstance(reg, OwlBall) else None)
    x = _initial_point(config, n, ball if needs_feasible else None)

    extra_names = []
    if backtracking:
        extra_names.append("bt_slack")
    if x_ref is not None:
        extra_names.append("dist_to_ref")
    builder = _TraceBuilder(tuple(extra_names))
    t0 = time.perf_counter()

    if backtracking:
        alpha = config.alpha0
    else:
        alpha = problem.lipschitz
        if alpha <= 0:
            raise SolverError("fixed-step FISTA needs a positive Lipschitz "
                              "estimate; the operator looks like zero")

    def record(k, x_val, f, alpha_val, bt, cert, slack):
        extra = {}
        if backtracking:
            extra["bt_slack"] = slack
        dist = None
        if x_ref is not None:
            dist = float(np.linalg.norm(x_val - x_ref))
            extra["dist_to_ref"] = dist
        builder.add(k, f, cert, alpha_val, bt, time.perf_counter() - t0, **extra)
        if config.callback is not None:
            config.callback(k, x_val)
        return dist

    r0 = op.matvec(x) - y
    record(0, x, 0.5 * float(r0 @ r0), alpha, 0, math.nan, math.nan)

    u = x.copy()
    t = 1.0
    for k in range(1, config.max_iter + 1):
        Hu = op.matvec(u)
        ru = Hu - y
        grad = op.rmatvec(ru)
        base = float(ru @ ru)
        bt = 0
        slack = math.nan
        while True:
            x_new = step_fn(u - grad / alpha, alpha)
            Hx_new = op.matvec(x_new)
            rn = Hx_new - y
            lhs = float(rn @ rn)
            if not backtracking:
                break
            dxu = x_new - u
            q = base + 2.0 * float(dxu @ grad) + 0.5 * alpha * float(dxu @ dxu)
            slack = q - lhs
            if lhs <= q:
                break
            alpha *= config.eta
            bt += 1
            if bt > config.max_backtracks:
                raise SolverError(
                    f"fista: quadratic-model test still failing after "
                    f"{config.max_backtracks} step inflations at iteration {k}")
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        u = x_new + ((t - 1.0) / t_new) * (x_new - x)
        rel = _rel_change(x_new, x)
        x = x_new
        t = t_new
        dist = record(k, x, 0.5 * lhs, alpha, bt, rel, slack)
        if stopping == "rel-change" and rel <= config.stop_tol:
            break
        if dist is not None and config.dist_target > 0 and dist <= config.dist_target:
            break
    return x, builder.build()

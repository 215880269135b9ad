"""Synthetic benchmark data and the two-phase evaluation protocol.

All randomness flows through numpy's Generator seeded with PCG64, a named
portable 64-bit generator whose standard_normal draws use the ziggurat
method; a given seed reproduces the same data on any platform.  The
observation noise stream uses seed + 1 so the design draw is unaffected by
the noise level.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .norms import OscarParams, oscar_weights, owl_norm
from .proximal import OwlBall, RootFindError
from .solvers import (Ivanov, RegressionProblem, SolverConfig, SolverError,
                      SolverTrace, Tikhonov, cg_solve, fista_solve, sparsa_solve)

__all__ = [
    "SyntheticSpec",
    "GroundTruth",
    "block_signal",
    "gen_design",
    "gen_ground_truth",
    "gen_observations",
    "mse",
    "ProtocolResult",
    "run_protocol",
    "PROTOCOL_ALGOS",
]

# Above this column count the Toeplitz Cholesky factor is too large and the
# exact stationary AR(1) column recurrence is used instead.
_CHOLESKY_MAX_N = 4000

_BLOCK_LENGTHS = (150, 50, 250, 50, 250, 50, 200)
_BLOCK_VALUES = (0.0, 3.0, 0.0, -4.0, 0.0, 6.0, 0.0)

PROTOCOL_ALGOS = ("cg", "fista", "fista-bt", "sparsa")


@dataclass(frozen=True)
class SyntheticSpec:
    """Synthetic problem description; the design has n = 1000 * d columns."""

    d: int = 1
    rho: float = 0.7
    kind: str = "correlated"
    m: int = 1000
    sigma2: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError("d must be a positive integer")
        if not (0 <= self.rho < 1):
            raise ValueError("rho must lie in [0, 1)")
        if self.kind not in ("correlated", "gaussian"):
            raise ValueError("kind must be 'correlated' or 'gaussian'")
        if self.m < 1:
            raise ValueError("m must be positive")
        if not (np.isfinite(self.sigma2) and self.sigma2 >= 0):
            raise ValueError("sigma2 must be non-negative")

    @property
    def n(self) -> int:
        return 1000 * self.d


@dataclass(frozen=True)
class GroundTruth:
    """Piecewise-constant planted signal and the scale it was built at."""

    x_true: np.ndarray
    scale: float


def block_signal(scale: float) -> np.ndarray:
    """Planted signal: zero runs alternating with constant blocks 3, -4, 6.

    Block lengths are (150, 50, 250, 50, 250, 50, 200) times scale, rounded;
    scale 1 gives length 1000 with 150 nonzero entries.
    """
    if not (np.isfinite(scale) and scale > 0):
        raise ValueError("scale must be positive")
    lengths = [round(length * scale) for length in _BLOCK_LENGTHS]
    if any(length < 1 for length in lengths):
        raise ValueError(f"scale {scale} collapses a block to length zero")
    return np.repeat(np.asarray(_BLOCK_VALUES), lengths)


def gen_ground_truth(d: int) -> GroundTruth:
    """Planted signal at integer scale d: length 1000 d, 150 d nonzeros."""
    if int(d) != d or d < 1:
        raise ValueError("d must be a positive integer")
    return GroundTruth(x_true=block_signal(d), scale=float(d))


def _correlated_rows(m: int, n: int, rho: float,
                     rng: np.random.Generator) -> np.ndarray:
    xi = rng.standard_normal((m, n))
    if rho == 0.0:
        return xi
    if n <= _CHOLESKY_MAX_N:
        cov = rho ** np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        return xi @ np.linalg.cholesky(cov).T
    # exact stationary AR(1) recurrence across columns, same law as above
    H = np.empty_like(xi)
    H[:, 0] = xi[:, 0]
    c = math.sqrt(1.0 - rho * rho)
    for j in range(1, n):
        H[:, j] = rho * H[:, j - 1] + c * xi[:, j]
    return H


def standardize_columns(H: np.ndarray) -> np.ndarray:
    """Center each column and scale it to unit sample standard deviation.

    Uses the m - 1 denominator; rejects fewer than two rows and
    zero-variance columns.
    """
    H = np.array(H, dtype=np.float64)
    if H.shape[0] < 2:
        raise ValueError("centering requires at least two rows")
    H -= H.mean(axis=0)
    sd = H.std(axis=0, ddof=1)
    if np.any(sd == 0.0):
        raise ValueError("zero-variance column cannot be standardized")
    H /= sd
    return H


def gen_design(spec: SyntheticSpec) -> np.ndarray:
    """Draw the design matrix for a synthetic spec.

    correlated: rows i.i.d. zero-mean Gaussian with covariance rho^|i - j|
    between columns i and j, then each column centered and standardized.
    gaussian: i.i.d. standard normal entries, returned raw.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "gaussian":
        return rng.standard_normal((spec.m, spec.n))
    return standardize_columns(_correlated_rows(spec.m, spec.n, spec.rho, rng))


def gen_observations(H: np.ndarray, x_true: np.ndarray, sigma2: float,
                     seed: int) -> np.ndarray:
    """Observations y = H x_true plus i.i.d. Gaussian noise of variance sigma2."""
    H = np.asarray(H, dtype=np.float64)
    x_true = np.asarray(x_true, dtype=np.float64)
    if H.ndim != 2 or H.shape[1] != x_true.size:
        raise ValueError(f"H has shape {H.shape}, x_true has length {x_true.size}")
    if not (np.isfinite(sigma2) and sigma2 >= 0):
        raise ValueError("sigma2 must be non-negative")
    y = H @ x_true
    if sigma2 > 0:
        y = y + math.sqrt(sigma2) * np.random.default_rng(seed).standard_normal(H.shape[0])
    return y


def mse(x, x_true) -> float:
    """Mean squared estimation error ||x - x_true||^2 / n."""
    x = np.asarray(x, dtype=np.float64)
    x_true = np.asarray(x_true, dtype=np.float64)
    if x.shape != x_true.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {x_true.shape}")
    d = x - x_true
    return float(d @ d) / d.size


@dataclass
class ProtocolResult:
    """Everything a protocol run produced, in memory plus on disk."""

    summary: dict
    traces: dict[str, SolverTrace]
    solutions: dict[str, np.ndarray]
    x_star: np.ndarray
    ground_truth: GroundTruth = field(repr=False)


def _time_to(trace: SolverTrace, threshold: float):
    dist = trace.extras.get("dist_to_ref")
    if dist is None:
        return None
    hit = np.nonzero(dist <= threshold)[0]
    return float(trace.time_s[hit[0]]) if hit.size else None


def run_protocol(spec: SyntheticSpec, oscar: OscarParams, algos=PROTOCOL_ALGOS,
                 out_dir=".", *, tight_tol: float = 1e-10,
                 tight_max_iter: int = 1_000_000, dist_target: float = 1e-4,
                 max_iter: int = 400_000, penalized: bool = True,
                 time_thresholds=(1e-3, 1e-4)) -> ProtocolResult:
    """Two-phase benchmark on one synthetic instance.

    Phase one solves the penalized problem (tau = 1, OSCAR weights carrying
    the regularization strength) with fixed-step FISTA to a tight relative
    iterate-change tolerance; its solution x_star fixes the ball radius
    epsilon = owl_norm(x_star).  Phase two runs every requested algorithm
    on the ball-constrained problem at that radius, and (when penalized is
    true) fista / sparsa on the penalized problem as well, all tracing
    distance to x_star and stopping once it falls below dist_target.

    Writes trace_<run>.csv per run and summary.json to out_dir; any solver
    failure still writes the summary, flagged with status 'failed', before
    the error propagates.

    Returns
    -------
    ProtocolResult
    """
    algos = tuple(algos)
    unknown = set(algos) - set(PROTOCOL_ALGOS)
    if unknown:
        raise ValueError(f"unknown algorithms: {sorted(unknown)}; "
                         f"choose from {PROTOCOL_ALGOS}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    H = gen_design(spec)
    gt = gen_ground_truth(spec.d)
    y = gen_observations(H, gt.x_true, spec.sigma2, spec.seed + 1)
    problem = RegressionProblem(H, y)
    w = oscar_weights(oscar, spec.n)
    tik = Tikhonov(1.0, w)

    t0 = time.perf_counter()
    x_star, phase1_trace = fista_solve(
        problem, tik,
        SolverConfig(stop_tol=tight_tol, max_iter=tight_max_iter),
        backtracking=False)
    phase1_time = time.perf_counter() - t0
    epsilon = owl_norm(x_star, w)
    ball = OwlBall(w, epsilon)

    summary = {
        "status": "ok",
        "spec": asdict(spec),
        "oscar": asdict(oscar),
        "epsilon": epsilon,
        "phase1": {
            "algorithm": "fista",
            "iterations": int(phase1_trace.k[-1]),
            "wall_time_s": phase1_time,
            "f_star": float(phase1_trace.f[-1]),
            "rel_change_tol": tight_tol,
            "mse": mse(x_star, gt.x_true),
        },
        "runs": {},
    }
    traces: dict[str, SolverTrace] = {}
    solutions: dict[str, np.ndarray] = {}

    def make_config(stop_tol):
        return SolverConfig(stop_tol=stop_tol, max_iter=max_iter,
                            x_ref=x_star, dist_target=dist_target)

    # the ball-constrained runs chase dist_target, with a floor that only a
    # fully frozen iterate can reach; the supplementary penalized re-runs
    # keep a larger rel-change floor so a stalled run (SpaRSA's residual
    # rule can pin the step) still ends
    jobs = [(f"{algo}_owl_i", algo, Ivanov(ball), 1e-14) for algo in algos]
    if penalized:
        for algo in ("fista", "sparsa"):
            if algo in algos:
                jobs.append((f"{algo}_owl_t", algo, tik, 1e-10))

    for name, algo, formulation, stop_tol in jobs:
        try:
            if algo == "cg":
                x, trace = cg_solve(problem, formulation, make_config(stop_tol))
            elif algo == "sparsa":
                x, trace = sparsa_solve(problem, formulation,
                                        make_config(stop_tol))
            else:
                x, trace = fista_solve(problem, formulation,
                                       make_config(stop_tol),
                                       backtracking=(algo == "fista-bt"))
        except (SolverError, RootFindError) as exc:
            summary["status"] = "failed"
            summary["failed_run"] = name
            summary["error"] = str(exc)
            (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
            raise
        trace.to_csv(out / f"trace_{name}.csv")
        traces[name] = trace
        solutions[name] = x
        summary["runs"][name] = {
            "algorithm": algo,
            "iterations": int(trace.k[-1]),
            "wall_time_s": float(trace.time_s[-1]),
            "final_f": float(trace.f[-1]),
            "final_dist": float(trace.extras["dist_to_ref"][-1]),
            "mse": mse(x, gt.x_true),
            "time_to": {f"{thr:g}": _time_to(trace, thr)
                        for thr in time_thresholds},
        }

    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return ProtocolResult(summary=summary, traces=traces, solutions=solutions,
                          x_star=x_star, ground_truth=gt)

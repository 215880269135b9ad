"""Command line entry point.

Every subcommand reads vectors as single-column CSV or JSON arrays ('-'
for stdin), writes at round-trip precision, and reports failures as a
single line on stderr with exit status 1.  Commands that write a run
directory default it to the OWLOPT_OUT_DIR environment variable, falling
back to the current directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .atoms import base_atoms, enumerate_atoms
from .bench import SyntheticSpec, gen_design, gen_ground_truth, gen_observations, mse, run_protocol
from .io import load_problem_csv, load_vector, load_weights, write_matrix_csv, write_vector
from .norms import OscarParams, oscar_weights, owl_norm
from .proximal import OwlBall, RootFindConfig, RootFindError, project_owl_ball, prox_owl
from .solvers import (Ivanov, SolverConfig, SolverError, Tikhonov, cg_solve,
                      fista_solve, sparsa_solve)

__all__ = ["main"]

_ALGOS = ("cg", "fista", "fista-bt", "sparsa")


class CliError(Exception):
    pass


def _add_weight_options(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--weights", metavar="FILE",
                   help="weight vector file (single-column CSV or JSON array, '-' for stdin)")
    g.add_argument("--lambda1", type=float, metavar="L1",
                   help="offset of linearly decreasing weights l1 + l2*(n-i)")
    p.add_argument("--lambda2", type=float, metavar="L2",
                   help="slope for --lambda1 weights (default 0)")


def _resolve_weights(args, n: int):
    if args.weights is not None:
        if args.lambda2 is not None:
            raise CliError("--lambda2 only applies with --lambda1, not --weights")
        w = load_weights(args.weights)
        if len(w) != n:
            raise CliError(f"weight vector has length {len(w)}, expected {n}")
        return w
    lam2 = 0.0 if args.lambda2 is None else args.lambda2
    return oscar_weights(OscarParams(args.lambda1, lam2), n)


def _emit_vector(dest: str, x: np.ndarray) -> None:
    if dest == "-":
        for value in np.asarray(x, dtype=np.float64):
            sys.stdout.write(f"{value:.17g}\n")
    else:
        write_vector(dest, x)


def _out_dir(args) -> str:
    if args.out_dir is not None:
        return args.out_dir
    return os.environ.get("OWLOPT_OUT_DIR", ".")


def _cmd_prox(args) -> None:
    v = load_vector(args.vector)
    w = _resolve_weights(args, v.size)
    _emit_vector(args.output, prox_owl(v, w, args.theta))


def _root_config(args):
    given = (args.tol_theta is not None, args.tol_g is not None)
    if given == (False, False):
        return None
    if all(given):
        return RootFindConfig(args.tol_theta, args.tol_g)
    raise CliError("--tol-theta and --tol-g must be given together")


def _cmd_project(args) -> None:
    v = load_vector(args.vector)
    w = _resolve_weights(args, v.size)
    ball = OwlBall(w, args.epsilon)
    x, info = project_owl_ball(v, ball, config=_root_config(args), return_info=True)
    _emit_vector(args.output, x)
    if args.info is not None:
        payload = {"theta": info.theta, "iterations": info.iterations,
                   "residual": info.residual, "interior": info.interior,
                   "bracket_width": info.bracket_width,
                   "norm": owl_norm(x, w), "epsilon": args.epsilon}
        text = json.dumps(payload, indent=2) + "\n"
        if args.info == "-":
            sys.stderr.write(text)
        else:
            with open(args.info, "w") as fh:
                fh.write(text)


def _cmd_atoms(args) -> None:
    w = _resolve_weights(args, args.dim)
    if args.enumerate:
        rows = enumerate_atoms(w)
        if args.output == "-":
            write_matrix_csv(sys.stdout, rows)
        else:
            write_matrix_csv(args.output, rows)
        return
    payload = [{"level": a.level, "tau": a.tau} for a in base_atoms(w)]
    text = json.dumps(payload, indent=2) + "\n"
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)


def _cmd_solve(args) -> None:
    problem = load_problem_csv(args.design, args.observations)
    w = _resolve_weights(args, problem.n)
    if args.formulation == "owl-t":
        if args.tau is None:
            raise CliError("owl-t needs --tau")
        if args.epsilon is not None:
            raise CliError("--epsilon does not apply to owl-t")
        if args.algo == "cg":
            raise CliError("cg only solves the ball-constrained form (owl-i)")
        reg = Tikhonov(args.tau, w)
    else:
        if args.epsilon is None:
            raise CliError("owl-i needs --epsilon")
        if args.tau is not None:
            raise CliError("--tau does not apply to owl-i")
        reg = Ivanov(OwlBall(w, args.epsilon))

    x0 = load_vector(args.x0) if args.x0 is not None else None
    config = SolverConfig(stop_tol=args.stop_tol, max_iter=args.max_iter, x0=x0)
    if args.algo == "cg":
        x, trace = cg_solve(problem, reg, config)
    elif args.algo == "sparsa":
        x, trace = sparsa_solve(problem, reg, config)
    else:
        x, trace = fista_solve(problem, reg, config,
                               backtracking=(args.algo == "fista-bt"))

    if args.trace is not None:
        trace.to_csv(args.trace)
    if args.solution is not None:
        _emit_vector(args.solution, x)
    summary = {
        "algorithm": args.algo,
        "formulation": args.formulation,
        "iterations": int(trace.k[-1]),
        "objective": float(trace.f[-1]),
        "certificate": float(trace.certificate[-1]),
        "wall_time_s": float(trace.time_s[-1]),
        "nonzeros": int(np.count_nonzero(x)),
    }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")


def _cmd_gen_data(args) -> None:
    spec = SyntheticSpec(d=args.d, rho=args.rho, kind=args.kind, m=args.m,
                         sigma2=args.sigma2, seed=args.seed)
    out = _out_dir(args)
    os.makedirs(out, exist_ok=True)
    H = gen_design(spec)
    gt = gen_ground_truth(spec.d)
    y = gen_observations(H, gt.x_true, spec.sigma2, spec.seed + 1)
    write_matrix_csv(os.path.join(out, "H.csv"), H)
    write_vector(os.path.join(out, "y.csv"), y)
    write_vector(os.path.join(out, "xtrue.csv"), gt.x_true)
    with open(os.path.join(out, "spec.json"), "w") as fh:
        fh.write(json.dumps({"d": spec.d, "rho": spec.rho, "kind": spec.kind,
                             "m": spec.m, "sigma2": spec.sigma2,
                             "seed": spec.seed, "n": spec.n}, indent=2) + "\n")
    sys.stdout.write(f"wrote H.csv, y.csv, xtrue.csv, spec.json to {out}\n")


def _cmd_bench(args) -> None:
    spec = SyntheticSpec(d=args.d, rho=args.rho, kind=args.kind, m=args.m,
                         sigma2=args.sigma2, seed=args.seed)
    lam2 = 0.0 if args.lambda2 is None else args.lambda2
    result = run_protocol(spec, OscarParams(args.lambda1, lam2),
                          algos=tuple(args.algos), out_dir=_out_dir(args),
                          tight_tol=args.phase1_tol,
                          dist_target=args.dist_target, max_iter=args.max_iter,
                          penalized=not args.skip_penalized)
    sys.stdout.write(json.dumps(result.summary, indent=2) + "\n")


def _cmd_mse(args) -> None:
    value = mse(load_vector(args.estimate), load_vector(args.reference))
    sys.stdout.write(f"{value:.17g}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="owlopt",
        description="Ordered weighted l1: norms, projections, and solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prox", help="proximity operator of the weighted sorted l1 norm")
    p.add_argument("vector", help="input vector file ('-' for stdin)")
    p.add_argument("--theta", type=float, required=True, help="prox scale (>= 0)")
    _add_weight_options(p)
    p.add_argument("-o", "--output", default="-", help="output file (default stdout)")
    p.set_defaults(func=_cmd_prox)

    p = sub.add_parser("project", help="Euclidean projection onto a norm ball")
    p.add_argument("vector", help="input vector file ('-' for stdin)")
    p.add_argument("--epsilon", type=float, required=True, help="ball radius")
    _add_weight_options(p)
    p.add_argument("--tol-theta", type=float, default=None,
                   help="root bracket tolerance (give with --tol-g)")
    p.add_argument("--tol-g", type=float, default=None,
                   help="norm residual tolerance (give with --tol-theta)")
    p.add_argument("--info", metavar="FILE", default=None,
                   help="write root-finding diagnostics as JSON ('-' for stderr)")
    p.add_argument("-o", "--output", default="-", help="output file (default stdout)")
    p.set_defaults(func=_cmd_project)

    p = sub.add_parser("atoms", help="atoms of the unit ball")
    p.add_argument("--dim", type=int, required=True, help="ambient dimension")
    _add_weight_options(p)
    p.add_argument("--enumerate", action="store_true",
                   help="materialize every signed atom as CSV rows (small dim only)")
    p.add_argument("-o", "--output", default="-", help="output file (default stdout)")
    p.set_defaults(func=_cmd_atoms)

    p = sub.add_parser("solve", help="solve a regularized least-squares problem")
    p.add_argument("design", help="design matrix CSV")
    p.add_argument("observations", help="observation vector file")
    p.add_argument("--formulation", choices=("owl-t", "owl-i"), required=True,
                   help="owl-t: penalized by tau * norm; owl-i: constrained to a ball")
    p.add_argument("--algo", choices=_ALGOS, required=True)
    p.add_argument("--tau", type=float, default=None, help="penalty strength (owl-t)")
    p.add_argument("--epsilon", type=float, default=None, help="ball radius (owl-i)")
    _add_weight_options(p)
    p.add_argument("--stop-tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--x0", metavar="FILE", default=None, help="starting point")
    p.add_argument("--trace", metavar="FILE", default=None,
                   help="write the per-iteration trace as CSV")
    p.add_argument("--solution", metavar="FILE", default=None,
                   help="write the solution vector ('-' for stdout)")
    p.set_defaults(func=_cmd_solve)

    for name, helptext in (("gen-data", "generate a synthetic problem instance"),
                           ("bench", "run the two-phase benchmark protocol")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--d", type=int, default=1, help="size multiplier, n = 1000 d")
        p.add_argument("--m", type=int, default=1000, help="number of rows")
        p.add_argument("--rho", type=float, default=0.7, help="column correlation decay")
        p.add_argument("--kind", choices=("correlated", "gaussian"), default="correlated")
        p.add_argument("--sigma2", type=float, default=0.01, help="noise variance")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-dir", default=None,
                       help="output directory (default $OWLOPT_OUT_DIR or '.')")
        if name == "bench":
            p.add_argument("--lambda1", type=float, required=True)
            p.add_argument("--lambda2", type=float, default=None)
            p.add_argument("--algos", nargs="+", choices=_ALGOS, default=list(_ALGOS))
            p.add_argument("--dist-target", type=float, default=1e-4,
                           help="stop once the distance to the reference drops below this")
            p.add_argument("--max-iter", type=int, default=400_000)
            p.add_argument("--phase1-tol", type=float, default=1e-10,
                           help="relative-change tolerance for the reference solve")
            p.add_argument("--skip-penalized", action="store_true",
                           help="run only the ball-constrained comparisons")
            p.set_defaults(func=_cmd_bench)
        else:
            p.set_defaults(func=_cmd_gen_data)

    p = sub.add_parser("mse", help="mean squared error between two vectors")
    p.add_argument("estimate", help="estimate vector file")
    p.add_argument("reference", help="reference vector file")
    p.set_defaults(func=_cmd_mse)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (CliError, ValueError, TypeError, OSError,
            RootFindError, SolverError) as exc:
        sys.stderr.write(f"owlopt: error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

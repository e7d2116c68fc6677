"""Command-line interface for problem generation, solving, and benchmarks.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .active import bound_theorem6, entry_budget, run_preconditioned_tark
from .harness import (ConfigError, ExperimentConfig, MethodSpec, checkpoint_grid,
                      records_to_csv, resolve_problem, run_experiment, verify_bounds,
                      write_csv)
from .linalg import (LeastSquaresProblem, NumericalError, load_matrix, load_vector,
                     save_matrix, save_vector, spectral_summary)
from .problems import (LowerBoundSpec, PolyRegressionSpec, eval_poly,
                       gen_lower_bound_problem, gen_poly_regression,
                       target_function)
from .ridge import mu_to_lambda, run_dual_rk, run_rkrr, run_tark_rr
from .rng import RngStream, derive_seed
from .solvers import run_rk, run_rka, run_rku, run_tark, run_tark_doubling


def _add_common(parser):
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", type=str, default=None, help="output path")
    parser.add_argument("--threads", type=int, default=1, help="worker threads")


def _cmd_generate(args) -> int:
    prefix = Path(args.out or f"{args.kind}_{args.n}x{args.d}")
    if args.kind in ("chebyshev", "monomial"):
        spec = PolyRegressionSpec(n=args.n, d=args.d, basis=args.kind,
                                  noise_std=args.noise_std, seed=args.seed)
        problem, _ = gen_poly_regression(spec)
        meta = {"kind": args.kind, "n": args.n, "d": args.d,
                "noise_std": args.noise_std, "seed": args.seed}
    elif args.kind == "lower-bound":
        lspec = LowerBoundSpec(d=args.d, m=args.m, v=args.v, seed=args.seed)
        problem = gen_lower_bound_problem(lspec)
        meta = {"kind": args.kind, "d": args.d, "m": args.m, "v": args.v,
                "seed": args.seed, "n": args.d * args.m}
    else:
        raise ConfigError(f"unknown problem kind {args.kind!r}")

    matrix_path = prefix.with_suffix(".matrix.txt")
    rhs_path = prefix.with_suffix(".rhs.txt")
    ref_path = prefix.with_suffix(".xstar.txt")
    save_matrix(matrix_path, problem.matrix)
    save_vector(rhs_path, problem.rhs)
    save_vector(ref_path, problem.reference_solution)
    summ = spectral_summary(problem.matrix)
    meta.update({
        "matrix": str(matrix_path),
        "rhs": str(rhs_path),
        "reference_solution": str(ref_path),
        "reference_residual_sq": problem.reference_residual_sq,
        "kappa_dem": summ.kappa_dem,
        "spectral_cond": summ.spectral_cond,
        "rank": summ.rank,
    })
    sidecar = prefix.with_suffix(".json")
    with open(sidecar, "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    print(f"wrote {matrix_path}, {rhs_path}, {ref_path}, {sidecar}")
    return 0


def _cmd_solve(args) -> int:
    matrix = load_matrix(args.matrix)
    rhs = load_vector(args.rhs)
    problem = LeastSquaresProblem(matrix=matrix, rhs=rhs)
    rng = RngStream(args.seed)
    t = args.t
    method = args.method
    if method == "RK":
        x = run_rk(problem, t=t, rng=rng)
    elif method == "TARK":
        x = run_tark(problem, t_b=args.t_b, t=t, rng=rng)
    elif method == "TARK_DOUBLING":
        x = run_tark_doubling(problem, t=t, rng=rng)
    elif method == "RKU":
        x = run_rku(problem, t=t, omega=args.omega, rng=rng)
    elif method == "RKA":
        x = run_rka(problem, t_outer=t // args.q, q=args.q, rng=rng)
    elif method == "RKRR":
        x = run_rkrr(problem, args.mu, t=t, rng=rng)
    elif method == "TARK_RR":
        x = run_tark_rr(problem, args.mu, t_b=args.t_b, t=t, rng=rng)
    elif method == "DUAL_RK":
        lam = mu_to_lambda(args.mu, problem.matrix.frob_sq)
        x = run_dual_rk(problem, lam, t=t, rng=rng)
    else:
        raise ConfigError(f"unknown method {method!r}")
    resid = rhs - matrix.entries @ x
    if args.out:
        save_vector(args.out, x)
        print(f"wrote {args.out}")
    else:
        print(" ".join(repr(float(v)) for v in x))
    print(f"residual_norm={float(np.linalg.norm(resid))!r}", file=sys.stderr)
    return 0


def _cmd_compare(args) -> int:
    cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    if args.seed is not None:
        cfg.master_seed = args.seed
    records, summary = run_experiment(cfg, threads=args.threads)
    out = args.out or cfg.out
    if out:
        write_csv(out, records)
        print(f"wrote {out}")
    else:
        sys.stdout.write(records_to_csv(records))
    print(json.dumps(summary, indent=2), file=sys.stderr)
    return 0


def _cmd_bounds(args) -> int:
    problem = resolve_problem(json.loads(args.problem))
    checks = verify_bounds(problem, theorem=args.theorem, trials=args.trials,
                           budget=args.t, t_b=args.t_b, mu=args.mu,
                           master_seed=args.seed)
    rows = ["rows_accessed,empirical_mse,std_err,bound,ok"]
    for c in checks:
        rows.append(f"{c.rows_accessed},{c.empirical_mse!r},{c.std_err!r},"
                    f"{c.bound!r},{int(c.ok)}")
    text = "\n".join(rows) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0 if all(c.ok for c in checks) else 1


def _cmd_active(args) -> int:
    rng = RngStream(args.seed)
    if args.matrix:
        if not args.rhs:
            raise ConfigError("--matrix needs --rhs")
        problem = LeastSquaresProblem(matrix=load_matrix(args.matrix),
                                      rhs=load_vector(args.rhs)).with_reference()
    else:
        gen = RngStream(args.seed).spawn(1)
        a = gen.normal(size=args.n * args.d).reshape(args.n, args.d)
        b = gen.normal(size=args.n)
        problem = LeastSquaresProblem.from_arrays(a, b).with_reference()
    if args.epsilon is not None:
        r = spectral_summary(problem.matrix).rank
        t = int(np.ceil(entry_budget(r, args.epsilon)))
        t_b = t // 2
    else:
        t, t_b = args.t, args.t_b if args.t_b is not None else args.t // 2
    res_star = problem.reference_residual_sq
    lines = ["trial,entries_accessed,residual_sq,residual_sq_lstsq,inflation"]
    inflations = []
    for trial in range(args.trials):
        result = run_preconditioned_tark(problem, t_b=t_b, t=t, rng=rng.spawn(trial))
        resid = problem.rhs - problem.matrix.entries @ result.x_hat
        rsq = float(resid @ resid)
        infl = rsq / res_star if res_star > 0 else float("inf")
        inflations.append(infl)
        lines.append(f"{trial},{result.entries_accessed},{rsq!r},{res_star!r},{infl!r}")
    factor = bound_theorem6(spectral_summary(problem.matrix).rank, t_b, t)
    print(f"mean inflation {np.mean(inflations):.4f} vs factor {factor:.4f}",
          file=sys.stderr)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _figure_config(figure: int, scale: str, seed: int) -> ExperimentConfig:
    n = 10**6 if scale == "full" else 10**5
    budget = 10**6 if scale == "full" else 10**5
    if figure == 1:
        methods = [
            {"method": "RK"},
            {"method": "TARK", "t_b": 1000},
            {"method": "RKU"},
            {"method": "RKA", "q": 10},
        ]
        problem = {"kind": "chebyshev", "n": n, "d": 25, "seed": seed}
        return ExperimentConfig.from_dict({
            "problem": problem, "methods": methods, "budget": budget,
            "trials": 10, "master_seed": seed,
        })
    if figure == 2:
        methods = [
            {"method": "TARK", "t_b": budget // 4},
            {"method": "TARK_RR", "t_b": budget // 4},
            {"method": "DUAL_RK"},
            {"method": "TARK_AUG", "t_b": budget // 4},
        ]
        problem = {"kind": "monomial", "n": n, "d": 25, "seed": seed}
        return ExperimentConfig.from_dict({
            "problem": problem, "methods": methods, "budget": budget,
            "trials": 10, "master_seed": seed, "mu": 0.999,
        })
    raise ConfigError("figure must be 1 or 2")


def _cmd_figure_data(args) -> int:
    cfg = _figure_config(args.figure, args.scale, args.seed)
    out_dir = Path(args.out or f"figure{args.figure}_data")
    out_dir.mkdir(parents=True, exist_ok=True)
    records, summary = run_experiment(cfg, threads=args.threads)
    csv_path = out_dir / f"figure{args.figure}.csv"
    write_csv(csv_path, records)

    sidecar = {"figure": args.figure, "scale": args.scale,
               "seed": args.seed, "summary": summary}
    if args.figure == 1:
        # coefficient estimates from trial 0 for the polynomial overlay
        problem = resolve_problem(cfg.problem)
        basis = "chebyshev"
        grid_u = np.linspace(-1.0, 1.0, 1000)
        curves = {"u": grid_u.tolist(), "target": target_function(grid_u).tolist()}
        coeffs = {}
        for mi, spec in enumerate(cfg.methods):
            if spec.method not in ("RK", "TARK"):
                continue
            rng = RngStream(derive_seed(cfg.master_seed, mi, 0))
            if spec.method == "RK":
                x = run_rk(problem, t=cfg.budget + 1, rng=rng)
            else:
                x = run_tark(problem, t_b=spec.t_b, t=cfg.budget + 1, rng=rng)
            coeffs[spec.name] = x.tolist()
            curves[spec.name] = eval_poly(np.asarray(x), basis, grid_u).tolist()
        sidecar["basis"] = basis
        sidecar["coefficients"] = coeffs
        sidecar["curves"] = curves
    sidecar_path = out_dir / f"figure{args.figure}.json"
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh)
        fh.write("\n")
    print(f"wrote {csv_path} and {sidecar_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tark",
                                     description="Row-access randomized solvers benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a benchmark problem to files")
    p.add_argument("--kind", required=True,
                   choices=["chebyshev", "monomial", "lower-bound"])
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--d", type=int, default=25)
    p.add_argument("--noise-std", type=float, default=0.2)
    p.add_argument("--m", type=int, default=10)
    p.add_argument("--v", type=float, default=5.0)
    _add_common(p)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("solve", help="run one solver on matrix/vector files")
    p.add_argument("--matrix", required=True)
    p.add_argument("--rhs", required=True)
    p.add_argument("--method", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--t-b", type=int, default=None)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--mu", type=float, default=0.999)
    _add_common(p)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("compare", help="run a multi-method experiment from JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("bounds", help="Monte-Carlo check of an error bound")
    p.add_argument("--problem", required=True,
                   help='problem JSON, e.g. \'{"kind":"chebyshev","n":1000,"d":5}\'')
    p.add_argument("--theorem", type=int, required=True, choices=[1, 2, 3, 4, 5])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--t", type=int, default=1000)
    p.add_argument("--t-b", type=int, default=None)
    p.add_argument("--mu", type=float, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("active", help="preconditioned volume-sampled pipeline")
    p.add_argument("--matrix", default=None)
    p.add_argument("--rhs", default=None)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--t", type=int, default=200)
    p.add_argument("--t-b", type=int, default=None)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--trials", type=int, default=50)
    _add_common(p)
    p.set_defaults(func=_cmd_active)

    p = sub.add_parser("figure-data", help="reproduce an experiment's trace CSV")
    p.add_argument("--figure", type=int, required=True, choices=[1, 2])
    p.add_argument("--scale", choices=["desk", "full"], default="desk")
    _add_common(p)
    p.set_defaults(func=_cmd_figure_data)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

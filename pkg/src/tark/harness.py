"""Seeded multi-trial experiment runner, bound verification, CSV emission.

Fairness convention: an experiment fixes a row-access budget shared by
every method. Plain projection methods run budget steps (final time
budget + 1); the averaged method runs budget / q outer steps of q rows
each, so the totals agree exactly. Trace rows are emitted in
(method, trial) order no matter how many worker threads ran, and with
timing disabled (the default) a rerun with the same seed produces a
byte-identical CSV.
"""

import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .linalg import LeastSquaresProblem, load_matrix, load_vector, ridge_solution, spectral_summary
from .problems import LowerBoundSpec, PolyRegressionSpec, gen_lower_bound_problem, gen_poly_regression
from .ridge import (RIDGE_METHODS, augmented_problem, bound_theorem4, bound_theorem5,
                    mu_to_lambda, run_dual_rk, run_rkrr, run_tark_rr)
from .rng import RngStream, derive_seed
from .sampling import sampler_for
from .solvers import (METHODS, bound_theorem1, bound_theorem2, bound_theorem3,
                      run_rk, run_rka, run_rku, run_tark, run_tark_doubling)

CSV_HEADER = "method,trial,rows_accessed,rel_err_lstsq,rel_err_ridge,residual_norm,wall_ns"

ALL_METHODS = METHODS + RIDGE_METHODS


class ConfigError(ValueError):
    """Bad experiment configuration (maps to exit code 2 in the CLI)."""


@dataclass(frozen=True)
class TraceRecord:
    method: str
    trial: int
    rows_accessed: int
    rel_err_lstsq: float
    rel_err_ridge: Optional[float]
    residual_norm: float
    wall_ns: int = 0


def checkpoint_grid(t_max: int, points_per_decade: int = 20) -> List[int]:
    """Log-spaced unique integers in [1, t_max], always keeping endpoints."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    if points_per_decade < 1:
        raise ValueError("points_per_decade must be >= 1")
    pts = {1, t_max}
    k = 0
    while True:
        val = int(round(10.0 ** (k / points_per_decade)))
        if val > t_max:
            break
        if val >= 1:
            pts.add(val)
        k += 1
    return sorted(pts)


_METHOD_KEYS = {"method", "t_b", "omega", "q", "mu", "label"}


@dataclass(frozen=True)
class MethodSpec:
    method: str
    t_b: Optional[int] = None
    omega: Optional[float] = None
    q: int = 1
    mu: Optional[float] = None
    label: Optional[str] = None

    @property
    def name(self) -> str:
        return self.label or self.method

    @classmethod
    def from_dict(cls, raw: dict) -> "MethodSpec":
        unknown = set(raw) - _METHOD_KEYS
        if unknown:
            raise ConfigError(f"unknown method keys: {sorted(unknown)}")
        if "method" not in raw:
            raise ConfigError("method entry needs a 'method' tag")
        if raw["method"] not in ALL_METHODS:
            raise ConfigError(f"unknown method tag {raw['method']!r}")
        return cls(**raw)


_PROBLEM_KEYS_GEN = {"kind", "n", "d", "noise_std", "seed", "m", "v"}
_PROBLEM_KEYS_FILE = {"matrix", "rhs", "reference_solution"}


def resolve_problem(raw: dict) -> LeastSquaresProblem:
    keys = set(raw)
    if "matrix" in keys:
        unknown = keys - _PROBLEM_KEYS_FILE
        if unknown:
            raise ConfigError(f"unknown problem keys: {sorted(unknown)}")
        matrix = load_matrix(raw["matrix"])
        rhs = load_vector(raw["rhs"])
        problem = LeastSquaresProblem(matrix=matrix, rhs=rhs)
        if "reference_solution" in raw:
            ref = load_vector(raw["reference_solution"])
            resid = rhs - matrix.entries @ ref
            problem = LeastSquaresProblem(matrix=matrix, rhs=rhs,
                                          reference_solution=ref,
                                          reference_residual_sq=float(resid @ resid))
        else:
            problem = problem.with_reference()
        return problem
    unknown = keys - _PROBLEM_KEYS_GEN
    if unknown:
        raise ConfigError(f"unknown problem keys: {sorted(unknown)}")
    kind = raw.get("kind")
    if kind in ("chebyshev", "monomial"):
        spec = PolyRegressionSpec(n=raw["n"], d=raw["d"], basis=kind,
                                  noise_std=raw.get("noise_std", 0.2),
                                  seed=raw.get("seed", 0))
        problem, _ = gen_poly_regression(spec)
        return problem
    if kind == "lower-bound":
        spec = LowerBoundSpec(d=raw["d"], m=raw["m"], v=raw["v"], seed=raw.get("seed", 0))
        return gen_lower_bound_problem(spec)
    raise ConfigError(f"unknown problem kind {kind!r}")


_CONFIG_KEYS = {"problem", "methods", "budget", "trials", "master_seed",
                "points_per_decade", "mu", "timing", "out"}


@dataclass
class ExperimentConfig:
    problem: dict
    methods: List[MethodSpec]
    budget: int
    trials: int = 10
    master_seed: int = 0
    points_per_decade: int = 20
    mu: Optional[float] = None
    timing: bool = False
    out: Optional[str] = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("problem", "methods", "budget"):
            if key not in raw:
                raise ConfigError(f"config needs {key!r}")
        methods = [MethodSpec.from_dict(m) for m in raw["methods"]]
        cfg = cls(problem=raw["problem"], methods=methods, budget=int(raw["budget"]),
                  trials=int(raw.get("trials", 10)),
                  master_seed=int(raw.get("master_seed", 0)),
                  points_per_decade=int(raw.get("points_per_decade", 20)),
                  mu=raw.get("mu"), timing=bool(raw.get("timing", False)),
                  out=raw.get("out"))
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def validate(self):
        if self.budget < 1:
            raise ConfigError("budget must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.methods:
            raise ConfigError("at least one method is required")
        for spec in self.methods:
            if spec.method == "RKA" and self.budget % spec.q != 0:
                raise ConfigError(
                    f"budget {self.budget} is not divisible by q={spec.q}: "
                    "row-access budgets would differ across methods")
            if spec.method in RIDGE_METHODS and spec.mu is None and self.mu is None:
                raise ConfigError(f"{spec.method} needs mu (method-level or config-level)")


@dataclass
class _Context:
    """Problem-wide constants shared by every run of one experiment."""

    problem: LeastSquaresProblem
    x_star: np.ndarray
    x_star_norm: float
    mu: Optional[float]
    lam: Optional[float]
    x_mu: Optional[np.ndarray]
    x_mu_norm: Optional[float]
    augmented: Optional[LeastSquaresProblem] = None
    samplers: dict = field(default_factory=dict)

    def sampler(self, key, problem):
        if key not in self.samplers:
            self.samplers[key] = sampler_for(problem)
        return self.samplers[key]


def _build_context(problem: LeastSquaresProblem, mu: Optional[float],
                   need_augmented: bool) -> _Context:
    if problem.reference_solution is None:
        problem = problem.with_reference()
    x_star = problem.reference_solution
    lam = x_mu = x_mu_norm = None
    augmented = None
    if mu is not None:
        lam = mu_to_lambda(mu, problem.matrix.frob_sq)
        x_mu = ridge_solution(problem, lam)
        x_mu_norm = float(np.linalg.norm(x_mu))
        if need_augmented:
            augmented = augmented_problem(problem, lam)
    return _Context(problem=problem, x_star=x_star,
                    x_star_norm=float(np.linalg.norm(x_star)),
                    mu=mu, lam=lam, x_mu=x_mu, x_mu_norm=x_mu_norm,
                    augmented=augmented)


def _rel(err_norm: float, ref_norm: float) -> float:
    return err_norm / ref_norm if ref_norm > 0 else err_norm


def _run_one(ctx: _Context, spec: MethodSpec, budget: int, grid: Sequence[int],
             seed: int, trial: int, timing: bool) -> List[TraceRecord]:
    problem = ctx.problem
    a = problem.matrix.entries
    b = problem.rhs
    records: List[TraceRecord] = []
    t0 = time.perf_counter_ns() if timing else 0
    mu = spec.mu if spec.mu is not None else ctx.mu

    def sink(rows: int, estimate: np.ndarray):
        resid = b - a @ estimate
        rel_star = _rel(float(np.linalg.norm(estimate - ctx.x_star)), ctx.x_star_norm)
        rel_mu = None
        if ctx.x_mu is not None:
            rel_mu = _rel(float(np.linalg.norm(estimate - ctx.x_mu)), ctx.x_mu_norm)
        wall = (time.perf_counter_ns() - t0) if timing else 0
        records.append(TraceRecord(method=spec.name, trial=trial, rows_accessed=rows,
                                   rel_err_lstsq=rel_star, rel_err_ridge=rel_mu,
                                   residual_norm=float(np.linalg.norm(resid)),
                                   wall_ns=wall))

    rng = RngStream(seed)
    t = budget + 1
    method = spec.method
    if method == "RK":
        run_rk(problem, t=t, rng=rng, trace_sink=sink, checkpoints=grid,
               sampler=ctx.sampler("base", problem))
    elif method == "RKU":
        run_rku(problem, t=t, omega=spec.omega, rng=rng, trace_sink=sink,
                checkpoints=grid, sampler=ctx.sampler("base", problem))
    elif method == "TARK":
        run_tark(problem, t_b=spec.t_b, t=t, rng=rng, trace_sink=sink,
                 checkpoints=grid, sampler=ctx.sampler("base", problem))
    elif method == "TARK_DOUBLING":
        run_tark_doubling(problem, t=t, rng=rng, trace_sink=sink,
                          checkpoints=grid, sampler=ctx.sampler("base", problem))
    elif method == "RKA":
        outer_grid = sorted({max(1, -(-c // spec.q)) for c in grid})
        run_rka(problem, t_outer=budget // spec.q, q=spec.q, rng=rng,
                trace_sink=sink, checkpoints=outer_grid,
                sampler=ctx.sampler("base", problem))
    elif method == "RKRR":
        run_rkrr(problem, mu, t=t, rng=rng, trace_sink=sink, checkpoints=grid,
                 sampler=ctx.sampler("base", problem))
    elif method == "TARK_RR":
        run_tark_rr(problem, mu, t_b=spec.t_b, t=t, rng=rng, trace_sink=sink,
                    checkpoints=grid, sampler=ctx.sampler("base", problem))
    elif method == "DUAL_RK":
        lam = mu_to_lambda(mu, problem.matrix.frob_sq)
        run_dual_rk(problem, lam, t=t, rng=rng, trace_sink=sink, checkpoints=grid,
                    sampler=ctx.sampler("base", problem))
    elif method in ("RK_AUG", "TARK_AUG"):
        aug = ctx.augmented
        aug_sampler = ctx.sampler("augmented", aug)
        if method == "RK_AUG":
            run_rk(aug, t=t, rng=rng, trace_sink=sink, checkpoints=grid,
                   sampler=aug_sampler)
        else:
            run_tark(aug, t_b=spec.t_b, t=t, rng=rng, trace_sink=sink,
                     checkpoints=grid, sampler=aug_sampler)
    else:
        raise ConfigError(f"unknown method tag {method!r}")
    return records


def run_experiment(config: ExperimentConfig, threads: int = 1
                   ) -> Tuple[List[TraceRecord], Dict[str, dict]]:
    """Run every (method, trial) pair; returns ordered records and summary.

    Per-run seeds derive from (master_seed, method_index, trial), so the
    output is independent of thread scheduling.
    """
    problem = resolve_problem(config.problem)
    need_aug = any(m.method in ("RK_AUG", "TARK_AUG") for m in config.methods)
    mu = config.mu
    if mu is None:
        for spec in config.methods:
            if spec.mu is not None:
                mu = spec.mu
                break
    ctx = _build_context(problem, mu, need_aug)
    grid = checkpoint_grid(config.budget, config.points_per_decade)

    jobs = [(mi, trial) for mi in range(len(config.methods))
            for trial in range(config.trials)]

    def work(job):
        mi, trial = job
        seed = derive_seed(config.master_seed, mi, trial)
        return job, _run_one(ctx, config.methods[mi], config.budget, grid,
                             seed, trial, config.timing)

    results: Dict[Tuple[int, int], List[TraceRecord]] = {}
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for job, recs in pool.map(work, jobs):
                results[job] = recs
    else:
        for job in jobs:
            key, recs = work(job)
            results[key] = recs

    records: List[TraceRecord] = []
    for job in jobs:
        records.extend(results[job])

    summary: Dict[str, dict] = {}
    for mi, spec in enumerate(config.methods):
        finals = [results[(mi, trial)][-1] for trial in range(config.trials)]
        errs = np.array([r.rel_err_lstsq for r in finals])
        entry = {
            "median_final_rel_err": float(np.median(errs)),
            "iqr_final_rel_err": float(np.percentile(errs, 75) - np.percentile(errs, 25)),
            "rows_accessed": finals[0].rows_accessed,
        }
        if ctx.x_mu is not None:
            ridge_errs = np.array([r.rel_err_ridge for r in finals])
            entry["median_final_rel_err_ridge"] = float(np.median(ridge_errs))
            entry["iqr_final_rel_err_ridge"] = float(
                np.percentile(ridge_errs, 75) - np.percentile(ridge_errs, 25))
        summary[spec.name] = entry
    return records, summary


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    return repr(float(value))


def records_to_csv(records: Sequence[TraceRecord]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in records:
        buf.write(f"{r.method},{r.trial},{r.rows_accessed},{_fmt(r.rel_err_lstsq)},"
                  f"{_fmt(r.rel_err_ridge)},{_fmt(r.residual_norm)},{r.wall_ns}\n")
    return buf.getvalue()


def write_csv(path, records: Sequence[TraceRecord]):
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))


# ---------------------------------------------------------------------------
# Monte-Carlo bound verification


@dataclass(frozen=True)
class BoundCheck:
    rows_accessed: int
    horizon: int
    empirical_mse: float
    std_err: float
    bound: float
    ok: bool


def verify_bounds(problem: LeastSquaresProblem, theorem: int, trials: int,
                  budget: int, t_b: Optional[int] = None, mu: Optional[float] = None,
                  master_seed: int = 0, points_per_decade: int = 10
                  ) -> List[BoundCheck]:
    """Empirical MSE vs. the stated bound at every checkpoint.

    Theorems 1-3 cover the plain solvers against the least-squares
    solution; 4-5 cover the weight-decay solvers against the ridge
    solution (mu required). Pass criterion: mse <= bound + 3 standard
    errors of the Monte-Carlo mean.
    """
    if theorem not in (1, 2, 3, 4, 5):
        raise ValueError("theorem must be in 1..5")
    if problem.reference_solution is None:
        problem = problem.with_reference()
    summ = spectral_summary(problem.matrix)
    kappa = summ.kappa_dem
    pinv_sq = 1.0 / (summ.sigma_min_pos ** 2)
    if theorem in (4, 5):
        if mu is None:
            raise ValueError("theorems 4 and 5 need mu")
        lam = mu_to_lambda(mu, problem.matrix.frob_sq)
        x_ref = ridge_solution(problem, lam)
        resid = problem.rhs - problem.matrix.entries @ x_ref
        residual_sq = float(resid @ resid)
    else:
        x_ref = problem.reference_solution
        residual_sq = float(problem.reference_residual_sq)
    init_err_sq = float(x_ref @ x_ref)  # x0 = 0

    grid = checkpoint_grid(budget, points_per_decade)
    if t_b is None:
        t_b = budget // 4
    sampler = sampler_for(problem)
    errs = np.empty((trials, len(grid)))

    for trial in range(trials):
        rng = RngStream(derive_seed(master_seed, theorem, trial))
        row = np.empty(len(grid))

        def sink(rows, estimate, row=row):
            idx = grid.index(rows)
            diff = estimate - x_ref
            row[idx] = float(diff @ diff)

        if theorem == 1:
            run_rk(problem, t=budget + 1, rng=rng, trace_sink=sink,
                   checkpoints=grid, sampler=sampler)
        elif theorem in (2, 3):
            run_tark(problem, t_b=t_b, t=budget + 1, rng=rng, trace_sink=sink,
                     checkpoints=grid, sampler=sampler)
        elif theorem == 4:
            run_rkrr(problem, mu, t=budget + 1, rng=rng, trace_sink=sink,
                     checkpoints=grid, sampler=sampler)
        else:
            run_tark_rr(problem, mu, t_b=t_b, t=budget + 1, rng=rng,
                        trace_sink=sink, checkpoints=grid, sampler=sampler)
        errs[trial] = row

    out = []
    for j, c in enumerate(grid):
        if theorem in (2, 3, 5) and c < t_b:
            continue  # tail average undefined before the burn-in
        horizon = c if theorem in (1, 4) else c + 1
        if theorem == 1:
            bound = bound_theorem1(kappa, init_err_sq, pinv_sq, residual_sq, horizon)
        elif theorem == 2:
            bound = bound_theorem2(kappa, init_err_sq, pinv_sq, residual_sq, t_b, horizon)
        elif theorem == 3:
            bound = bound_theorem3(kappa, init_err_sq, pinv_sq, residual_sq, t_b, horizon)
        elif theorem == 4:
            bound = bound_theorem4(kappa, mu, lam, init_err_sq, residual_sq, horizon)
        else:
            bound = bound_theorem5(kappa, mu, lam, init_err_sq, residual_sq, t_b, horizon)
        mse = float(errs[:, j].mean())
        se = float(errs[:, j].std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
        # the bound inputs (kappa, pinv norm, residual) carry O(eps) relative
        # error of their own, so allow a relative roundoff term besides 3 SE
        ok = mse <= bound + 3.0 * se + 1e-12 * max(bound, mse)
        out.append(BoundCheck(rows_accessed=c, horizon=horizon, empirical_mse=mse,
                              std_err=se, bound=bound, ok=ok))
    return out

"""Ridge-regression variants of the row-projection solvers.

The primary scheme alternates one sampled-row projection with a
deterministic shrink x <- mu * x, which solves the ridge problem with
parameter lam = (1 - mu) / mu * ||A||_F^2. Baselines: the same solvers on
the explicitly augmented system [A; sqrt(lam) I], and a dual method that
relaxes one coordinate of the length-n dual vector per step.
"""

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .linalg import DenseMatrix, LeastSquaresProblem
from .rng import RngStream
from .sampling import WeightedSampler, sampler_for
from .solvers import TraceSink, _checkpoint_list, _make_run, run_rk, run_tark

RIDGE_METHODS = ("RKRR", "TARK_RR", "DUAL_RK", "RK_AUG", "TARK_AUG")


@dataclass(frozen=True)
class RidgeConfig:
    """Shrink factor mu in (0, 1) with its induced ridge parameter."""

    mu: float
    t: int
    t_b: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ValueError("mu must lie in (0, 1)")
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.t_b is not None and not 0 <= self.t_b < self.t:
            raise ValueError("t_b must satisfy 0 <= t_b < t")

    def lam(self, frob_sq: float) -> float:
        return mu_to_lambda(self.mu, frob_sq)


def mu_to_lambda(mu: float, frob_sq: float) -> float:
    """Ridge parameter induced by shrink factor mu: (1 - mu) / mu * ||A||_F^2."""
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    if frob_sq <= 0.0:
        raise ValueError("frob_sq must be positive")
    return (1.0 - mu) / mu * frob_sq


def lambda_to_mu(lam: float, frob_sq: float) -> float:
    """Inverse of mu_to_lambda; round-trips to 1e-14 relative."""
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    if frob_sq <= 0.0:
        raise ValueError("frob_sq must be positive")
    return frob_sq / (frob_sq + lam)


def rkrr_step(x, row, b_i: float, mu: float) -> np.ndarray:
    """One weight-decay step: project onto the sampled row, then shrink."""
    row = np.asarray(row, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    nrm_sq = float(row @ row)
    if nrm_sq == 0.0:
        raise ValueError("cannot project onto a zero row")
    if not 0.0 < mu <= 1.0:
        raise ValueError("mu must lie in (0, 1]")
    return mu * (x + ((b_i - float(row @ x)) / nrm_sq) * row)


def run_rkrr(problem: LeastSquaresProblem, mu: float, x0=None, t: int = 2,
             rng: Optional[RngStream] = None,
             trace_sink: Optional[TraceSink] = None,
             checkpoints: Optional[Iterable[int]] = None,
             sampler: Optional[WeightedSampler] = None) -> np.ndarray:
    """Weight-decay RK iterates; converges to the ridge solution's horizon.

    mu = 1 is accepted for reduction tests and reproduces run_rk bitwise.
    """
    if not 0.0 < mu <= 1.0:
        raise ValueError("mu must lie in (0, 1]")
    return run_rk(problem, x0, t, rng, trace_sink, checkpoints, sampler, mu=mu)


def run_tark_rr(problem: LeastSquaresProblem, mu: float, x0=None,
                t_b: Optional[int] = None, t: int = 2,
                rng: Optional[RngStream] = None,
                trace_sink: Optional[TraceSink] = None,
                checkpoints: Optional[Iterable[int]] = None,
                sampler: Optional[WeightedSampler] = None) -> np.ndarray:
    """Tail-averaged weight-decay RK; the mu = 1 path is TARK bitwise."""
    if not 0.0 < mu <= 1.0:
        raise ValueError("mu must lie in (0, 1]")
    return run_tark(problem, x0, t_b, t, rng, trace_sink, checkpoints, sampler, mu=mu)


def augmented_problem(problem: LeastSquaresProblem, lam: float) -> LeastSquaresProblem:
    """Stack sqrt(lam) * I under A and zeros under b.

    The exact least-squares solution of the stacked system is the ridge
    solution of the original problem.
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    a = problem.matrix.entries
    d = a.shape[1]
    stacked = np.vstack([a, np.sqrt(lam) * np.eye(d)])
    rhs = np.concatenate([problem.rhs, np.zeros(d)])
    return LeastSquaresProblem(matrix=DenseMatrix.from_array(stacked), rhs=rhs)


def run_dual_rk(problem: LeastSquaresProblem, lam: float, t: int = 2,
                rng: Optional[RngStream] = None,
                trace_sink: Optional[TraceSink] = None,
                checkpoints: Optional[Iterable[int]] = None,
                sampler: Optional[WeightedSampler] = None,
                y0=None) -> np.ndarray:
    """Dual coordinate relaxation for the ridge problem.

    Keeps the length-n dual vector y (initialized to zero) and the primal
    x = A^T y. Each step samples a row and solves its dual coordinate
    exactly; the fixed point (A A^T + lam I) y = b gives x equal to the
    ridge solution. Row sampling reuses the squared-norm distribution.
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    if rng is None:
        raise ValueError("an RngStream is required")
    run = _make_run(problem, None, rng, sampler)
    n = problem.matrix.n_rows
    if y0 is None:
        y = np.zeros(n)
    else:
        y = np.array(y0, dtype=np.float64, copy=True)
        if y.shape != (n,):
            raise ValueError("y0 length must equal n_rows")
    run.x[:] = problem.matrix.entries.T @ y if y.any() else 0.0
    cps = _checkpoint_list(checkpoints, t - 1)

    def to(target: int):
        n_steps = target - run.steps_done
        if n_steps > 0:
            _kernels.advance_dual(run.A, run.b, run.row_sq, run.prob, run.alias,
                                  run.state, run.x, y, lam, n_steps)
            run.steps_done += n_steps

    for c in cps:
        to(c)
        if trace_sink is not None:
            trace_sink(run.steps_done, run.x.copy())
    to(t - 1)
    return run.x


def bound_theorem4(kappa_dem: float, mu: float, lam: float, init_err_sq: float,
                   residual_mu_sq: float, t: int) -> float:
    """Iterate MSE bound for weight-decay RK against the ridge solution."""
    rate = mu * mu * (1.0 - 1.0 / (kappa_dem * kappa_dem))
    return 2.0 * rate ** t * init_err_sq + 2.0 * mu / ((1.0 + mu) * lam) * residual_mu_sq


def bound_theorem5(kappa_dem: float, mu: float, lam: float, init_err_sq: float,
                   residual_mu_sq: float, t_b: int, t: int) -> float:
    """Tail-average MSE bound for weight-decay RK."""
    rate = mu * mu * (1.0 - 1.0 / (kappa_dem * kappa_dem))
    bias = 2.0 * rate ** t_b * init_err_sq
    variance = 2.0 * mu / ((t - t_b) * (1.0 - mu) * lam) * residual_mu_sq
    return bias + variance

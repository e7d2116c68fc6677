"""Randomized row-projection solvers for least squares.

Method zoo (iteration counts follow the convention that final time t
means iterates x_0 .. x_{t-1}, i.e. t - 1 sampled rows):

  RK             plain randomized row projections
  TARK           RK plus an averaged tail x_{t_b} .. x_{t-1}
  TARK_DOUBLING  TARK with burn-in 2^(floor(log2 t) - 1) in O(d) memory
  RKU            RK with a constant underrelaxation factor omega
  RKA            RK averaging q independent one-row corrections per step

Tail sums use compensated (Kahan) accumulation in iteration order; a
million-term naive sum would lose about six digits. The doubling variant
is bitwise identical to fixed-burn-in TARK at the matching burn-in
because both feed the same accumulation kernel in the same order.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from . import _kernels
from .linalg import LeastSquaresProblem
from .rng import RngStream
from .sampling import WeightedSampler, sampler_for

METHODS = ("RK", "TARK", "TARK_DOUBLING", "RKU", "RKA")


@dataclass(frozen=True)
class SolverConfig:
    """Method tag plus hyperparameters for one solver run."""

    method: str
    t: int
    t_b: Optional[int] = None
    omega: Optional[float] = None
    q: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.t_b is not None and not 0 <= self.t_b < self.t:
            raise ValueError("t_b must satisfy 0 <= t_b < t")
        if self.omega is not None and not 0.0 < self.omega <= 1.0:
            raise ValueError("omega must lie in (0, 1]")
        if self.q < 1:
            raise ValueError("q must be >= 1")

    @property
    def burn_in(self) -> int:
        # default burn-in: a quarter of the final time
        return self.t // 4 if self.t_b is None else self.t_b


def default_burn_in(t: int) -> int:
    return t // 4


def doubling_burn_in(t: int) -> int:
    """Burn-in 2^(floor(log2 t) - 1) used by the doubling schedule, t >= 2."""
    if t < 2:
        raise ValueError("doubling burn-in needs t >= 2")
    return 1 << (t.bit_length() - 2)


def rk_step(x, row, b_i: float) -> np.ndarray:
    """Project x onto the hyperplane row . x = b_i."""
    row = np.asarray(row, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    nrm_sq = float(row @ row)
    if nrm_sq == 0.0:
        raise ValueError("cannot project onto a zero row")
    return x + ((b_i - float(row @ x)) / nrm_sq) * row


class TailAverager:
    """Kahan-compensated tail sums, fixed or doubling burn-in.

    Fixed mode keeps one accumulator started at the burn-in iterate.
    Doubling mode keeps two: `main` spans the current burn-in block and
    `next` the block that takes over at the next power-of-two boundary.
    """

    def __init__(self, d: int, mode: str = "fixed"):
        if mode not in ("fixed", "doubling"):
            raise ValueError(f"unknown tail mode {mode!r}")
        self.mode = mode
        self.sum_main = np.zeros(d)
        self.comp_main = np.zeros(d)
        self.sum_next = np.zeros(d)
        self.comp_next = np.zeros(d)
        self.start_main = 1
        self.start_next = 1

    def swap_blocks(self, boundary: int):
        """Promote the building block at iterate index `boundary` (a power of 2)."""
        self.sum_main[:] = self.sum_next
        self.comp_main[:] = self.comp_next
        self.sum_next[:] = 0.0
        self.comp_next[:] = 0.0
        self.start_main = self.start_next
        self.start_next = boundary

    def add(self, x: np.ndarray):
        _kernels.kahan_add_vec(self.sum_main, self.comp_main, x)
        if self.mode == "doubling":
            _kernels.kahan_add_vec(self.sum_next, self.comp_next, x)

    def fixed_average(self, count: int) -> np.ndarray:
        return self.sum_main / count

    def doubling_average(self, horizon: int) -> np.ndarray:
        t_b = doubling_burn_in(horizon)
        if self.start_next == t_b:
            return self.sum_next / (horizon - t_b)
        if self.start_main == t_b:
            return self.sum_main / (horizon - t_b)
        raise RuntimeError(
            f"no accumulator starts at burn-in {t_b} (have {self.start_main}, {self.start_next})"
        )


@dataclass
class _Run:
    """Shared mutable state for one solver run."""

    A: np.ndarray
    b: np.ndarray
    row_sq: np.ndarray
    prob: np.ndarray
    alias: np.ndarray
    state: np.ndarray
    x: np.ndarray
    steps_done: int = 0
    extra_args: dict = field(default_factory=dict)

    def advance(self, nsteps: int, omega: float = 1.0, mu: float = 1.0):
        if nsteps > 0:
            _kernels.advance(self.A, self.b, self.row_sq, self.prob, self.alias,
                             self.state, self.x, nsteps, omega, mu)
            self.steps_done += nsteps

    def advance_tail(self, nsteps: int, avg: TailAverager,
                     omega: float = 1.0, mu: float = 1.0):
        if nsteps <= 0:
            return
        if avg.mode == "doubling":
            _kernels.advance_tail2(self.A, self.b, self.row_sq, self.prob,
                                   self.alias, self.state, self.x, nsteps,
                                   omega, mu, avg.sum_main, avg.comp_main,
                                   avg.sum_next, avg.comp_next)
        else:
            _kernels.advance_tail(self.A, self.b, self.row_sq, self.prob,
                                  self.alias, self.state, self.x, nsteps,
                                  omega, mu, avg.sum_main, avg.comp_main)
        self.steps_done += nsteps


def _make_run(problem: LeastSquaresProblem, x0, rng: RngStream,
              sampler: Optional[WeightedSampler]) -> _Run:
    if sampler is None:
        sampler = sampler_for(problem)
    d = problem.matrix.n_cols
    if x0 is None:
        x = np.zeros(d)
    else:
        x = np.array(x0, dtype=np.float64, copy=True)
        if x.shape != (d,):
            raise ValueError("x0 length must equal n_cols")
    return _Run(
        A=problem.matrix.entries,
        b=problem.rhs,
        row_sq=problem.matrix.row_sq_norms,
        prob=sampler.prob,
        alias=sampler.alias,
        state=rng.state,
        x=x,
    )


def _checkpoint_list(checkpoints, last: int):
    """Normalize a checkpoint iterable to sorted unique ints in [1, last]."""
    if checkpoints is None:
        return []
    cps = sorted({int(c) for c in checkpoints if 1 <= int(c) <= last})
    return cps


TraceSink = Callable[[int, np.ndarray], None]


def run_rk(problem: LeastSquaresProblem, x0=None, t: int = 2,
           rng: Optional[RngStream] = None, trace_sink: Optional[TraceSink] = None,
           checkpoints: Optional[Iterable[int]] = None,
           sampler: Optional[WeightedSampler] = None,
           omega: float = 1.0, mu: float = 1.0) -> np.ndarray:
    """Run t - 1 randomized projection steps; returns the final iterate.

    trace_sink, when given, receives (rows_accessed, iterate copy) at each
    checkpoint (counted in sampled rows). omega scales the correction and
    mu shrinks the iterate after each step; both default to 1 (plain RK).
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    if rng is None:
        raise ValueError("an RngStream is required")
    run = _make_run(problem, x0, rng, sampler)
    cps = _checkpoint_list(checkpoints, t - 1)
    for c in cps:
        run.advance(c - run.steps_done, omega=omega, mu=mu)
        if trace_sink is not None:
            trace_sink(run.steps_done, run.x.copy())
    run.advance((t - 1) - run.steps_done, omega=omega, mu=mu)
    return run.x


def run_rku(problem: LeastSquaresProblem, x0=None, t: int = 2,
            omega: Optional[float] = None, rng: Optional[RngStream] = None,
            trace_sink: Optional[TraceSink] = None,
            checkpoints: Optional[Iterable[int]] = None,
            sampler: Optional[WeightedSampler] = None,
            omega_schedule: Optional[Callable[[int], float]] = None) -> np.ndarray:
    """Underrelaxed RK. omega defaults to 1/sqrt(t); omega = 1 is plain RK.

    omega_schedule, when given, supplies omega per step index and forces a
    step-at-a-time path (slower; meant for experimentation).
    """
    if omega_schedule is not None:
        if rng is None:
            raise ValueError("an RngStream is required")
        run = _make_run(problem, x0, rng, sampler)
        cps = set(_checkpoint_list(checkpoints, t - 1))
        for s in range(t - 1):
            run.advance(1, omega=float(omega_schedule(s)))
            if trace_sink is not None and run.steps_done in cps:
                trace_sink(run.steps_done, run.x.copy())
        return run.x
    if omega is None:
        omega = 1.0 / math.sqrt(t)
    if not 0.0 < omega <= 1.0:
        raise ValueError("omega must lie in (0, 1]")
    return run_rk(problem, x0, t, rng, trace_sink, checkpoints, sampler, omega=omega)


def _tail_estimate(run: _Run, avg: TailAverager, t_b: int) -> np.ndarray:
    c = run.steps_done
    if c < t_b:
        return run.x.copy()
    return avg.fixed_average(c - t_b + 1)


def run_tark(problem: LeastSquaresProblem, x0=None, t_b: Optional[int] = None,
             t: int = 2, rng: Optional[RngStream] = None,
             trace_sink: Optional[TraceSink] = None,
             checkpoints: Optional[Iterable[int]] = None,
             sampler: Optional[WeightedSampler] = None,
             mu: float = 1.0) -> np.ndarray:
    """Tail-averaged RK: mean of iterates x_{t_b} .. x_{t-1}.

    t_b defaults to t // 4. Checkpoints past the burn-in report the
    running tail mean (the value a run stopped at that horizon would
    return); earlier checkpoints report the raw iterate.
    """
    if rng is None:
        raise ValueError("an RngStream is required")
    if t_b is None:
        t_b = default_burn_in(t)
    if not 0 <= t_b < t:
        raise ValueError("need 0 <= t_b < t")
    run = _make_run(problem, x0, rng, sampler)
    avg = TailAverager(run.x.shape[0], mode="fixed")
    if t_b == 0:
        avg.add(run.x)  # x_0 belongs to the tail
    cps = _checkpoint_list(checkpoints, t - 1)

    def to(target: int):
        # advance to `target` steps done, switching accumulation on at the
        # step that produces iterate t_b
        while run.steps_done < target:
            if run.steps_done < t_b - 1:
                run.advance(min(target, t_b - 1) - run.steps_done, mu=mu)
            else:
                run.advance_tail(target - run.steps_done, avg, mu=mu)

    for c in cps:
        to(c)
        if trace_sink is not None:
            trace_sink(run.steps_done, _tail_estimate(run, avg, t_b))
    to(t - 1)
    return _tail_estimate(run, avg, t_b)


def run_tark_doubling(problem: LeastSquaresProblem, x0=None, t: int = 2,
                      rng: Optional[RngStream] = None,
                      trace_sink: Optional[TraceSink] = None,
                      checkpoints: Optional[Iterable[int]] = None,
                      sampler: Optional[WeightedSampler] = None,
                      mu: float = 1.0) -> np.ndarray:
    """TARK with burn-in 2^(floor(log2 t) - 1) using O(d) extra memory.

    Matches run_tark at the same burn-in bitwise on a shared stream: the
    reported accumulator was reset at the burn-in iterate and then fed
    identically. Checkpoints report the doubling average at that horizon.
    """
    if t < 2:
        raise ValueError("t must be >= 2")
    if rng is None:
        raise ValueError("an RngStream is required")
    run = _make_run(problem, x0, rng, sampler)
    avg = TailAverager(run.x.shape[0], mode="doubling")
    cps = _checkpoint_list(checkpoints, t - 1)
    ci = 0
    while run.steps_done < t - 1:
        nxt = run.steps_done + 1  # iterate produced next
        if nxt >= 2 and (nxt & (nxt - 1)) == 0:
            avg.swap_blocks(nxt)
        boundary = 1 << nxt.bit_length()  # next power of two above nxt
        target = min(t - 1, boundary - 1)
        while ci < len(cps) and cps[ci] <= run.steps_done:
            ci += 1
        if ci < len(cps) and cps[ci] <= target:
            target = cps[ci]
        run.advance_tail(target - run.steps_done, avg, mu=mu)
        if trace_sink is not None and ci < len(cps) and cps[ci] == run.steps_done:
            trace_sink(run.steps_done, avg.doubling_average(run.steps_done + 1))
    return avg.doubling_average(t)


def run_rka(problem: LeastSquaresProblem, x0=None, t_outer: int = 1, q: int = 1,
            rng: Optional[RngStream] = None, trace_sink: Optional[TraceSink] = None,
            checkpoints: Optional[Iterable[int]] = None,
            sampler: Optional[WeightedSampler] = None) -> np.ndarray:
    """Averaged RK: each outer step means q one-row corrections from the
    current iterate, applied as their plain mean. Accesses t_outer * q rows.

    Checkpoints are in outer steps; the sink sees rows_accessed = outer * q.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if rng is None:
        raise ValueError("an RngStream is required")
    run = _make_run(problem, x0, rng, sampler)
    scratch = np.empty_like(run.x)
    cps = _checkpoint_list(checkpoints, t_outer)

    def to(target: int):
        n = target - run.steps_done
        if n > 0:
            _kernels.advance_averaged(run.A, run.b, run.row_sq, run.prob,
                                      run.alias, run.state, run.x, n, q, scratch)
            run.steps_done += n

    for c in cps:
        to(c)
        if trace_sink is not None:
            trace_sink(run.steps_done * q, run.x.copy())
    to(t_outer)
    return run.x


def run_tark_stream(draw_row: Callable[[RngStream], tuple], d: int, x0=None,
                    t_b: Optional[int] = None, t: int = 2,
                    rng: Optional[RngStream] = None) -> np.ndarray:
    """TARK over an abstract row stream (e.g. a semi-infinite row oracle).

    draw_row(rng) must return (feature_vector, response, squared_norm) with
    the draw already weighted by squared norm. Python-loop speed; meant for
    continuous problems where rows cannot be tabulated.
    """
    if rng is None:
        raise ValueError("an RngStream is required")
    if t_b is None:
        t_b = default_burn_in(t)
    if not 0 <= t_b < t:
        raise ValueError("need 0 <= t_b < t")
    x = np.zeros(d) if x0 is None else np.array(x0, dtype=np.float64, copy=True)
    avg = TailAverager(d, mode="fixed")
    if t_b == 0:
        avg.add(x)
    for s in range(t - 1):
        a, bval, w = draw_row(rng)
        if w <= 0.0:
            raise ValueError("row oracle returned a nonpositive squared norm")
        x = x + ((bval - float(a @ x)) / w) * a
        if s + 1 >= t_b:
            avg.add(x)
    return avg.fixed_average(t - t_b)


# ---------------------------------------------------------------------------
# Mean-square-error bound evaluators


def bound_theorem1(kappa_dem: float, init_err_sq: float, pinv_norm_sq: float,
                   residual_sq: float, t: int) -> float:
    """Iterate MSE bound: exponential decay to a residual-sized horizon."""
    rate = 1.0 - 1.0 / (kappa_dem * kappa_dem)
    return rate ** t * init_err_sq + pinv_norm_sq * residual_sq


def bound_theorem2(kappa_dem: float, init_err_sq: float, pinv_norm_sq: float,
                   residual_sq: float, t_b: int, t: int) -> float:
    """Tail-average MSE bound: exponential burn-in plus 1/(t - t_b) tail."""
    k2 = kappa_dem * kappa_dem
    rate = 1.0 - 1.0 / k2
    return rate ** t_b * init_err_sq + (2.0 * k2 - 1.0) / (t - t_b) * pinv_norm_sq * residual_sq


def bound_theorem3(kappa_dem: float, init_err_sq: float, pinv_norm_sq: float,
                   residual_sq: float, t_b: int, t: int) -> float:
    """Tail-average MSE bound that vanishes as t grows with t_b fixed."""
    k2 = kappa_dem * kappa_dem
    rate = 1.0 - 1.0 / k2
    inner = k2 * rate ** t_b / (t - t_b) * init_err_sq + pinv_norm_sq * residual_sq
    return (2.0 * k2 - 1.0) / (t - t_b) * inner

"""Preconditioned tail-averaged solver with volume-sampled initialization.

Pipeline: thin pivoted QR of A, draw r rows of the orthonormal factor
from the square-volume distribution, initialize from the r x r subsystem,
run tail-averaged projections on the orthonormal system, and map back
through R. The point is entry efficiency: the right-hand side is touched
r times for the initializer plus once per projection step.
"""

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .linalg import (DenseMatrix, LeastSquaresProblem, NumericalError, form_q,
                     qr_pivoted)
from .rng import RngStream
from .solvers import run_tark

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QRFactors:
    """Thin rank-revealing QR: A[:, piv] = Q @ R with Q n x r orthonormal."""

    q: np.ndarray
    r: np.ndarray
    piv: np.ndarray
    rank: int


@dataclass(frozen=True)
class VolumeSample:
    indices: np.ndarray


def thin_qr(matrix: DenseMatrix) -> QRFactors:
    fac, taus, piv, rank = qr_pivoted(matrix.entries)
    if rank == 0:
        raise NumericalError("zero matrix has no thin QR")
    q = form_q(fac, taus, rank)
    r = np.triu(fac[:rank, :])
    return QRFactors(q=q, r=r, piv=piv, rank=rank)


def volume_sample(q: np.ndarray, rng: RngStream) -> VolumeSample:
    """Draw r distinct row indices of orthonormal q with P(S) ~ det(q_S)^2.

    Sequential projection chain: sample a row by its current leverage,
    project the rest orthogonal to it, repeat r times.
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    n, r = q.shape
    if n < r:
        raise ValueError("need at least r rows")
    picked = np.empty(r, dtype=np.int64)
    status = _kernels.volume_sample_rows(q.copy(), rng.state, picked)
    if status != 0:
        raise NumericalError("volume sampling hit a rank-deficient factor")
    return VolumeSample(indices=picked)


def volume_sample_batch(q: np.ndarray, rng: RngStream, count: int) -> np.ndarray:
    """count independent volume samples as a (count, r) index array."""
    q = np.ascontiguousarray(q, dtype=np.float64)
    out = np.empty((count, q.shape[1]), dtype=np.int64)
    status = _kernels.volume_sample_many(q, rng.state, out)
    if status != 0:
        raise NumericalError("volume sampling hit a rank-deficient factor")
    return out


class PreconditionedResult(NamedTuple):
    x_hat: np.ndarray
    y_tail: np.ndarray
    subset: np.ndarray
    rank: int
    entries_accessed: int
    resamples: int


def _min_norm_through_r(r: np.ndarray, piv: np.ndarray, y: np.ndarray,
                        d: int) -> np.ndarray:
    """Minimum-norm x with R x[piv] = y for full-row-rank upper R (r x d)."""
    rank = r.shape[0]
    x = np.zeros(d)
    if rank == d:
        z = np.zeros(d)
        for i in range(d - 1, -1, -1):
            z[i] = (y[i] - r[i, i + 1:] @ z[i + 1:]) / r[i, i]
    else:
        w = np.linalg.solve(r @ r.T, y)
        z = r.T @ w
    x[piv] = z
    return x


def run_preconditioned_tark(problem: LeastSquaresProblem, t_b: int, t: int,
                            rng: RngStream, x0_only: bool = False,
                            max_resamples: int = 16) -> PreconditionedResult:
    """Full pipeline; returns the estimate and the entry-access count.

    The subset solve retries with a fresh volume sample if the r x r
    subsystem is numerically singular (a probability-zero event up to
    roundoff). x0_only skips the projection phase and returns the
    initializer mapped through R (useful for testing the initializer).
    """
    if not 0 <= t_b < t:
        raise ValueError("need 0 <= t_b < t")
    factors = thin_qr(problem.matrix)
    q, r, piv, rank = factors.q, factors.r, factors.piv, factors.rank
    b = problem.rhs

    resamples = 0
    y0 = None
    subset = None
    for attempt in range(max_resamples):
        subset = volume_sample(q, rng).indices
        qs = q[subset, :]
        try:
            y0 = np.linalg.solve(qs, b[subset])
        except np.linalg.LinAlgError:
            y0 = None
        if y0 is not None and np.isfinite(y0).all():
            break
        resamples += 1
        logger.warning("volume subset was singular, resampling (attempt %d)", attempt + 1)
    if y0 is None:
        raise NumericalError("could not draw a nonsingular volume subset")

    if x0_only:
        x_hat = _min_norm_through_r(r, piv, y0, problem.matrix.n_cols)
        return PreconditionedResult(x_hat, y0, subset, rank, rank, resamples)

    ortho_problem = LeastSquaresProblem(matrix=DenseMatrix.from_array(q), rhs=b)
    y_tail = run_tark(ortho_problem, x0=y0, t_b=t_b, t=t, rng=rng)
    x_hat = _min_norm_through_r(r, piv, y_tail, problem.matrix.n_cols)
    entries = rank + (t - 1)
    return PreconditionedResult(x_hat, y_tail, subset, rank, entries, resamples)


def bound_theorem6(r: int, t_b: int, t: int) -> float:
    """Residual inflation factor for the preconditioned pipeline."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if not t_b < t:
        raise ValueError("need t_b < t")
    return 1.0 + (1.0 - 1.0 / r) ** t_b * r + (2.0 * r - 1.0) / (t - t_b)


def entry_budget(r: int, epsilon: float) -> float:
    """Entry count sufficient for residual inflation <= 1 + epsilon."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return r + r * math.log(2.0 * r / epsilon) + (4.0 * r - 2.0) / epsilon

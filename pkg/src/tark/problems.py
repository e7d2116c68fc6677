"""Benchmark problem generators and row oracles.

Two families drive the shipped experiments: polynomial regression on an
equally spaced grid (Chebyshev basis for the well-conditioned variant,
raw monomials for the ill-conditioned one), and an adversarial block
design whose least-squares error admits an exact entry-budget floor.
A continuous Chebyshev row oracle extends the polynomial problem to its
infinitely-tall analogue.
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .linalg import DenseMatrix, LeastSquaresProblem
from .rng import RngStream
from .sampling import rejection_sample

BASES = ("chebyshev", "monomial")

DEFAULT_NOISE_STD = 0.2  # noise variance 0.04


def target_function(u):
    """Smooth benchmark target: sin(pi u) exp(-2u) + cos(4 pi u)."""
    u = np.asarray(u, dtype=np.float64)
    return np.sin(np.pi * u) * np.exp(-2.0 * u) + np.cos(4.0 * np.pi * u)


def chebyshev_values(u, d: int) -> np.ndarray:
    """Matrix T_j(u_i), j < d, by the three-term recurrence."""
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    out = np.empty((u.shape[0], d))
    out[:, 0] = 1.0
    if d > 1:
        out[:, 1] = u
    for j in range(2, d):
        out[:, j] = 2.0 * u * out[:, j - 1] - out[:, j - 2]
    return out


def monomial_values(u, d: int) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    out = np.empty((u.shape[0], d))
    out[:, 0] = 1.0
    for j in range(1, d):
        out[:, j] = out[:, j - 1] * u
    return out


def eval_poly(coeffs, basis: str, u):
    """Evaluate sum_j c_j phi_j(u): Clenshaw for Chebyshev, Horner otherwise."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    d = coeffs.shape[0]
    if basis == "chebyshev":
        b1 = np.zeros_like(u, dtype=np.float64)
        b2 = np.zeros_like(b1)
        for j in range(d - 1, 0, -1):
            b1, b2 = coeffs[j] + 2.0 * u * b1 - b2, b1
        return coeffs[0] + u * b1 - b2
    if basis == "monomial":
        acc = np.zeros_like(u, dtype=np.float64)
        for j in range(d - 1, -1, -1):
            acc = acc * u + coeffs[j]
        return acc
    raise ValueError(f"unknown basis {basis!r}")


@dataclass(frozen=True)
class PolyRegressionSpec:
    n: int
    d: int
    basis: str = "chebyshev"
    noise_std: float = DEFAULT_NOISE_STD
    seed: int = 0

    def __post_init__(self):
        if self.basis not in BASES:
            raise ValueError(f"basis must be one of {BASES}")
        if self.n < self.d or self.d < 1:
            raise ValueError("need n >= d >= 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")


def gen_poly_regression(
    spec: PolyRegressionSpec,
    target: Callable[[np.ndarray], np.ndarray] = target_function,
    attach_reference: bool = True,
) -> Tuple[LeastSquaresProblem, Callable[[np.ndarray], np.ndarray]]:
    """Noisy samples of `target` on an equally spaced grid over [-1, 1].

    Returns the regression problem (reference solution attached unless
    disabled) together with the target function handle.
    """
    u = np.linspace(-1.0, 1.0, spec.n)
    a = chebyshev_values(u, spec.d) if spec.basis == "chebyshev" else monomial_values(u, spec.d)
    b = target(u)
    if spec.noise_std > 0:
        rng = RngStream(spec.seed)
        b = b + spec.noise_std * rng.normal(size=spec.n)
    problem = LeastSquaresProblem(matrix=DenseMatrix.from_array(a), rhs=b)
    if attach_reference:
        problem = problem.with_reference()
    return problem, target


@dataclass(frozen=True)
class LowerBoundSpec:
    """Block design: d copies of an all-ones column, block height m.

    Right-hand-side blocks are iid Gaussian with covariance I + v 11^T,
    sampled as g + sqrt(v) * gamma * 1 (g standard normal vector, gamma
    standard normal scalar).
    """

    d: int
    m: int
    v: float
    seed: int = 0

    def __post_init__(self):
        if self.d < 1 or self.m < 2:
            raise ValueError("need d >= 1 and m >= 2")
        if self.v < 0:
            raise ValueError("v must be nonnegative")


def gen_lower_bound_problem(spec: LowerBoundSpec) -> LeastSquaresProblem:
    """Instance of the block design with exact reference attached.

    The least-squares solution is the per-block mean; every singular value
    is sqrt(m), so the pseudoinverse norm squared is exactly 1/m.
    """
    d, m = spec.d, spec.m
    a = np.zeros((m * d, d))
    for i in range(d):
        a[i * m:(i + 1) * m, i] = 1.0
    rng = RngStream(spec.seed)
    b = np.empty(m * d)
    for i in range(d):
        g = rng.normal(size=m)
        gamma = rng.normal()
        b[i * m:(i + 1) * m] = g + math.sqrt(spec.v) * gamma
    means = b.reshape(d, m).mean(axis=1)
    resid = b - np.repeat(means, m)
    return LeastSquaresProblem(
        matrix=DenseMatrix.from_array(a),
        rhs=b,
        reference_solution=means,
        reference_residual_sq=float(resid @ resid),
    )


def lower_bound_mse(d: int, m: int, v: float, t: float) -> float:
    """Best possible MSE for any estimator that reveals t entries of b.

    Nonincreasing in t; exactly zero at t = m d (everything revealed).
    """
    if t < 0 or t > m * d:
        raise ValueError("need 0 <= t <= m * d")
    k = t / d  # entries revealed per block under the optimal split
    return d / (m * m) * (m - k) * (1.0 + v * (m - k) / (1.0 + v * k))


class RowOracle(ABC):
    """Abstract row source: draws (feature vector, response, squared norm).

    Draws arrive already weighted by squared norm, which is what the
    projection solvers expect. norm_bound dominates every squared norm;
    frob_sq is the integral of the squared norm under the base measure.
    """

    norm_bound: float
    frob_sq: float

    @abstractmethod
    def draw(self, rng: RngStream) -> Tuple[np.ndarray, float, float]:
        ...


class ChebyshevRowOracle(RowOracle):
    """Continuous analogue of the Chebyshev regression problem.

    Rows are indexed by u in [-1, 1] under the uniform probability
    measure; a(u) stacks the first d Chebyshev polynomials, so the
    squared norm never exceeds d (attained at the endpoints). Sampling
    u proportional to the squared norm uses rejection against that bound.
    """

    def __init__(self, d: int, noise_std: float = DEFAULT_NOISE_STD,
                 target: Callable[[np.ndarray], np.ndarray] = target_function):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = d
        self.noise_std = noise_std
        self.target = target
        self.norm_bound = float(d)
        # integral of sum_j T_j(u)^2 under uniform(-1, 1):
        # T_0 contributes 1, T_j (j >= 1) contributes (1 - 1/(4 j^2 - 1)) / 2
        acc = 1.0
        for j in range(1, d):
            acc += 0.5 * (1.0 - 1.0 / (4.0 * j * j - 1.0))
        self.frob_sq = acc

    def weight_at(self, u: float) -> float:
        row = chebyshev_values(np.array([u]), self.d)[0]
        return float(row @ row)

    def draw_u(self, rng: RngStream) -> float:
        def provider(r: RngStream):
            u = -1.0 + 2.0 * r.uniform()
            return u, self.weight_at(u)

        return rejection_sample(self.norm_bound, provider, rng)

    def draw(self, rng: RngStream) -> Tuple[np.ndarray, float, float]:
        u = self.draw_u(rng)
        row = chebyshev_values(np.array([u]), self.d)[0]
        response = float(self.target(np.array([u]))[0])
        if self.noise_std > 0:
            response += self.noise_std * rng.normal()
        return row, response, float(row @ row)


def chebyshev_row_oracle(d: int, noise_std: float = DEFAULT_NOISE_STD) -> ChebyshevRowOracle:
    return ChebyshevRowOracle(d, noise_std=noise_std)

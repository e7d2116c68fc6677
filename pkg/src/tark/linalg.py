"""Dense kernels and direct reference solvers.

Everything here is deterministic and desk-scale: matrices are stored
row-major in full, the column dimension is assumed small (d <= 64 in all
shipped experiments), and the reference factorization is a from-scratch
Householder QR with column pivoting so that rank-deficient systems get
the minimum-norm solution.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np


class NumericalError(ValueError):
    """Raised when inputs are numerically unusable (non-finite, zero, ...)."""


def _as_matrix(entries) -> np.ndarray:
    a = np.ascontiguousarray(entries, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("matrix entries must be 2-dimensional")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("matrix must have at least one row and one column")
    return a


@dataclass(frozen=True)
class DenseMatrix:
    """Row-major dense matrix with cached row squared norms.

    The cache is computed once at construction and the underlying buffers
    are marked read-only, so instances can be shared across threads.
    """

    entries: np.ndarray
    row_sq_norms: np.ndarray

    @classmethod
    def from_array(cls, entries) -> "DenseMatrix":
        a = _as_matrix(entries).copy()
        norms = np.einsum("ij,ij->i", a, a)
        a.flags.writeable = False
        norms.flags.writeable = False
        return cls(entries=a, row_sq_norms=norms)

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[1]

    @property
    def frob_sq(self) -> float:
        return float(self.row_sq_norms.sum())

    def row(self, i: int) -> np.ndarray:
        return self.entries[i]


@dataclass(frozen=True)
class LeastSquaresProblem:
    """A matrix and right-hand side, optionally carrying the exact solution."""

    matrix: DenseMatrix
    rhs: np.ndarray
    reference_solution: Optional[np.ndarray] = None
    reference_residual_sq: Optional[float] = None

    def __post_init__(self):
        rhs = np.ascontiguousarray(self.rhs, dtype=np.float64)
        if rhs.shape != (self.matrix.n_rows,):
            raise ValueError("rhs length must equal the number of rows")
        rhs = rhs.copy()
        rhs.flags.writeable = False
        object.__setattr__(self, "rhs", rhs)
        if self.reference_solution is not None:
            ref = np.ascontiguousarray(self.reference_solution, dtype=np.float64).copy()
            if ref.shape != (self.matrix.n_cols,):
                raise ValueError("reference solution length must equal n_cols")
            ref.flags.writeable = False
            object.__setattr__(self, "reference_solution", ref)

    @classmethod
    def from_arrays(cls, a, b, reference_solution=None, reference_residual_sq=None):
        return cls(
            matrix=DenseMatrix.from_array(a),
            rhs=np.asarray(b, dtype=np.float64),
            reference_solution=reference_solution,
            reference_residual_sq=reference_residual_sq,
        )

    def with_reference(self) -> "LeastSquaresProblem":
        """Attach the direct least-squares solution and residual."""
        x = lstsq_reference(self)
        r = self.rhs - self.matrix.entries @ x
        return LeastSquaresProblem(
            matrix=self.matrix,
            rhs=self.rhs,
            reference_solution=x,
            reference_residual_sq=float(r @ r),
        )

    def normal_equation_defect(self) -> float:
        """Norm of A^T (b - A x_ref); small iff the reference is consistent."""
        if self.reference_solution is None:
            raise ValueError("problem has no reference solution")
        r = self.rhs - self.matrix.entries @ self.reference_solution
        return float(np.linalg.norm(self.matrix.entries.T @ r))


@dataclass(frozen=True)
class SpectralSummary:
    sigma_max: float
    sigma_min_pos: float
    frob_norm: float
    rank: int

    @property
    def kappa_dem(self) -> float:
        return self.frob_norm / self.sigma_min_pos

    @property
    def spectral_cond(self) -> float:
        return self.sigma_max / self.sigma_min_pos


def _check_finite(a: np.ndarray, what: str):
    if not np.isfinite(a).all():
        raise NumericalError(f"{what} contains non-finite entries")


# ---------------------------------------------------------------------------
# Householder QR with column pivoting


def qr_pivoted(a: np.ndarray):
    """Compact pivoted QR: returns (fac, taus, piv, rank).

    fac holds R in its upper triangle and the Householder tails below the
    diagonal. Columns are pivoted on the largest remaining norm; the rank
    is cut where the diagonal falls under eps * max(n, d) * |R[0, 0]|.
    """
    _check_finite(a, "matrix")
    fac = np.array(a, dtype=np.float64, order="F", copy=True)
    n, d = fac.shape
    kmax = min(n, d)
    taus = np.zeros(kmax)
    piv = np.arange(d)
    rank = 0
    tol = np.finfo(np.float64).eps * max(n, d)
    first_diag = None
    for k in range(kmax):
        norms = np.einsum("ij,ij->j", fac[k:, k:], fac[k:, k:])
        j = int(np.argmax(norms)) + k
        if j != k:
            fac[:, [k, j]] = fac[:, [j, k]]
            piv[[k, j]] = piv[[j, k]]
        normx = float(np.sqrt(norms[j - k])) if j != k else float(np.sqrt(norms[0]))
        if first_diag is None:
            first_diag = normx
        if normx <= tol * (first_diag if first_diag > 0 else 1.0):
            break
        alpha = fac[k, k]
        beta = -np.copysign(normx, alpha) if alpha != 0.0 else -normx
        tau = (beta - alpha) / beta
        scale = alpha - beta
        v = fac[k + 1:, k] / scale
        fac[k, k] = beta
        # apply (I - tau w w^T) with w = [1, v] to the trailing block
        if k + 1 <= d - 1:
            w_dot = fac[k, k + 1:] + v @ fac[k + 1:, k + 1:]
            fac[k, k + 1:] -= tau * w_dot
            fac[k + 1:, k + 1:] -= tau * np.outer(v, w_dot)
        fac[k + 1:, k] = v
        taus[k] = tau
        rank = k + 1
    return fac, taus, piv, rank


def apply_q_transpose(fac: np.ndarray, taus: np.ndarray, rank: int, b: np.ndarray):
    """Compute Q^T b from a compact pivoted QR factorization."""
    y = np.array(b, dtype=np.float64, copy=True)
    for k in range(rank):
        tau = taus[k]
        if tau == 0.0:
            continue
        v = fac[k + 1:, k]
        w_dot = y[k] + v @ y[k + 1:]
        y[k] -= tau * w_dot
        y[k + 1:] -= tau * w_dot * v
    return y


def form_q(fac: np.ndarray, taus: np.ndarray, rank: int) -> np.ndarray:
    """Materialize the thin orthonormal factor (n x rank)."""
    n = fac.shape[0]
    q = np.zeros((n, rank))
    q[np.arange(rank), np.arange(rank)] = 1.0
    for k in range(rank - 1, -1, -1):
        tau = taus[k]
        if tau == 0.0:
            continue
        v = fac[k + 1:, k]
        w_dot = q[k, :] + v @ q[k + 1:, :]
        q[k, :] -= tau * w_dot
        q[k + 1:, :] -= tau * np.outer(v, w_dot)
    return np.ascontiguousarray(q)


def _solve_upper(r: np.ndarray, y: np.ndarray) -> np.ndarray:
    m = r.shape[0]
    x = np.zeros(m)
    for i in range(m - 1, -1, -1):
        x[i] = (y[i] - r[i, i + 1:] @ x[i + 1:]) / r[i, i]
    return x


def _solve_lower(l: np.ndarray, y: np.ndarray) -> np.ndarray:
    m = l.shape[0]
    x = np.zeros(m)
    for i in range(m):
        x[i] = (y[i] - l[i, :i] @ x[:i]) / l[i, i]
    return x


def lstsq_reference(problem: LeastSquaresProblem) -> np.ndarray:
    """Minimum-norm least-squares solution by rank-revealing QR.

    Rank-deficient systems go through a complete orthogonal decomposition
    (a second QR on R^T) so the returned vector is the minimum-norm one.
    """
    a = problem.matrix.entries
    b = problem.rhs
    _check_finite(b, "rhs")
    fac, taus, piv, rank = qr_pivoted(a)
    d = a.shape[1]
    x = np.zeros(d)
    if rank == 0:
        return x
    y = apply_q_transpose(fac, taus, rank, b)[:rank]
    r = np.triu(fac[:rank, :])  # rank x d
    if rank == d:
        z = _solve_upper(r, y)
    else:
        # R^T = U T with U orthonormal (d x rank): min-norm z = U T^-T y
        ufac, utaus, upiv, urank = qr_pivoted(r.T)
        if urank < rank:
            raise NumericalError("rank collapse in the orthogonal completion")
        t = np.triu(ufac[:rank, :rank])
        # qr_pivoted may permute the columns of R^T (rows of R); undo it
        w = _solve_lower(t.T, y[upiv])
        z = form_q(ufac, utaus, rank) @ w
    x[piv] = z
    return x


# ---------------------------------------------------------------------------
# Spectral quantities


def _one_sided_jacobi_singular_values(m: np.ndarray) -> np.ndarray:
    """Singular values by one-sided Jacobi column orthogonalization.

    Works on a copy; accurate for small singular values because no Gram
    matrix is ever formed.
    """
    a = np.array(m, dtype=np.float64, copy=True)
    if a.shape[0] < a.shape[1]:
        a = a.T.copy()
    ncols = a.shape[1]
    eps = np.finfo(np.float64).eps
    for _ in range(60):
        off = 0.0
        for p in range(ncols - 1):
            for q in range(p + 1, ncols):
                cp = a[:, p]
                cq = a[:, q]
                app = cp @ cp
                aqq = cq @ cq
                apq = cp @ cq
                if app == 0.0 or aqq == 0.0:
                    continue
                if abs(apq) <= eps * np.sqrt(app * aqq):
                    continue
                off = max(off, abs(apq) / np.sqrt(app * aqq))
                zeta = (aqq - app) / (2.0 * apq)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_p = c * cp - s * cq
                new_q = s * cp + c * cq
                a[:, p] = new_p
                a[:, q] = new_q
        if off == 0.0:
            break
    sv = np.sqrt(np.einsum("ij,ij->j", a, a))
    sv.sort()
    return sv[::-1]


def spectral_summary(matrix: DenseMatrix) -> SpectralSummary:
    """Singular-value summary via pivoted QR plus one-sided Jacobi on R."""
    a = matrix.entries
    _check_finite(a, "matrix")
    frob = float(np.sqrt(matrix.frob_sq))
    if frob == 0.0:
        raise NumericalError("zero matrix has no spectral summary")
    n, d = a.shape
    fac, taus, piv, rank_qr = qr_pivoted(a)
    r = np.triu(fac[: min(n, d), :])
    sv = _one_sided_jacobi_singular_values(r)
    sigma_max = float(sv[0])
    # numerical-rank cutoff at machine precision; a looser factor would
    # swallow the genuine tiny singular values of ill-conditioned bases
    tol = np.finfo(np.float64).eps * max(n, d) * sigma_max
    positive = sv[sv > tol]
    rank = int(positive.size)
    if rank == 0:
        raise NumericalError("matrix is numerically zero")
    return SpectralSummary(
        sigma_max=sigma_max,
        sigma_min_pos=float(positive[-1]),
        frob_norm=frob,
        rank=rank,
    )


def demmel_condition(matrix: DenseMatrix) -> float:
    """Frobenius norm over the smallest positive singular value."""
    s = spectral_summary(matrix)
    return s.frob_norm / s.sigma_min_pos


def ridge_solution(problem: LeastSquaresProblem, lam: float) -> np.ndarray:
    """Solve the ridge-penalized normal equations (A^T A + lam I) x = A^T b.

    lam = 0 delegates to the minimum-norm least-squares reference.
    """
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if lam == 0.0:
        return lstsq_reference(problem)
    a = problem.matrix.entries
    b = problem.rhs
    _check_finite(a, "matrix")
    _check_finite(b, "rhs")
    d = a.shape[1]
    gram = a.T @ a + lam * np.eye(d)
    return np.linalg.solve(gram, a.T @ b)


def ridge_normal_defect(problem: LeastSquaresProblem, lam: float, x: np.ndarray) -> float:
    """Relative defect in A^T (b - A x) = lam x."""
    a = problem.matrix.entries
    lhs = a.T @ (problem.rhs - a @ x)
    rhs = lam * x
    scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs), 1e-300)
    return float(np.linalg.norm(lhs - rhs) / scale)


# ---------------------------------------------------------------------------
# Plain-text matrix/vector files


def save_matrix(path, matrix: DenseMatrix):
    a = matrix.entries
    with open(path, "w") as fh:
        fh.write(f"{a.shape[0]} {a.shape[1]}\n")
        for row in a:
            fh.write(" ".join(repr(float(v)) for v in row))
            fh.write("\n")


def load_matrix(path) -> DenseMatrix:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: expected 'n d' header")
        n, d = int(header[0]), int(header[1])
        data = np.loadtxt(fh, dtype=np.float64, ndmin=2)
    if data.shape != (n, d):
        raise ValueError(f"{path}: body shape {data.shape} does not match header ({n}, {d})")
    return DenseMatrix.from_array(data)


def save_vector(path, vec):
    v = np.asarray(vec, dtype=np.float64)
    with open(path, "w") as fh:
        fh.write(f"{v.shape[0]}\n")
        for val in v:
            fh.write(repr(float(val)))
            fh.write("\n")


def load_vector(path) -> np.ndarray:
    with open(path) as fh:
        n = int(fh.readline().strip())
        data = np.loadtxt(fh, dtype=np.float64, ndmin=1)
    if data.shape != (n,):
        raise ValueError(f"{path}: body length {data.shape[0]} does not match header {n}")
    return data

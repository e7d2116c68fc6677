"""Compiled inner loops: PRNG, alias sampling, and solver step kernels.

Everything stochastic funnels through the xoshiro256** generator defined
here so that a given stream state produces the same draws no matter which
solver consumes it. Kernels never use fastmath: float op order is fixed,
which is what makes the bitwise reduction identities between solver
variants (underrelaxation at omega=1, averaging at q=1, weight decay at
mu=1) hold exactly.
"""

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)

_U64 = np.uint64
_DBL_SCALE = 1.0 / 9007199254740992.0  # 2^-53


@njit(**_JIT)
def xoshiro_next(state):
    """Advance a 4-word xoshiro256** state in place, return one uint64."""
    result = state[1] * _U64(5)
    result = ((result << _U64(7)) | (result >> _U64(57))) * _U64(9)
    t = state[1] << _U64(17)
    state[2] ^= state[0]
    state[3] ^= state[1]
    state[1] ^= state[2]
    state[0] ^= state[3]
    state[2] ^= t
    state[3] = (state[3] << _U64(45)) | (state[3] >> _U64(19))
    return result


@njit(**_JIT)
def uniform_next(state):
    """Uniform double in [0, 1) with 53-bit mantissa."""
    return np.float64(xoshiro_next(state) >> _U64(11)) * _DBL_SCALE


@njit(**_JIT)
def bounded_next(state, n):
    """Unbiased integer in [0, n) via rejection on the top range."""
    nn = _U64(n)
    rem = (_U64(0) - nn) % nn  # 2^64 mod n
    if rem == _U64(0):
        return np.int64(xoshiro_next(state) % nn)
    lim = _U64(0) - rem  # largest multiple of n representable
    u = xoshiro_next(state)
    while u >= lim:
        u = xoshiro_next(state)
    return np.int64(u % nn)


@njit(**_JIT)
def fill_uniform(state, out):
    for i in range(out.shape[0]):
        out[i] = uniform_next(state)


@njit(**_JIT)
def fill_normal(state, out):
    """Standard normals via Box-Muller; odd tails discard the spare."""
    m = out.shape[0]
    i = 0
    while i + 1 < m:
        u1 = np.float64((xoshiro_next(state) >> _U64(11)) + _U64(1)) * _DBL_SCALE
        u2 = uniform_next(state)
        r = np.sqrt(-2.0 * np.log(u1))
        out[i] = r * np.cos(2.0 * np.pi * u2)
        out[i + 1] = r * np.sin(2.0 * np.pi * u2)
        i += 2
    if i < m:
        u1 = np.float64((xoshiro_next(state) >> _U64(11)) + _U64(1)) * _DBL_SCALE
        u2 = uniform_next(state)
        out[i] = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@njit(**_JIT)
def alias_draw(state, prob, alias):
    """One draw from a Vose alias table (two uniforms per draw)."""
    k = bounded_next(state, prob.shape[0])
    if uniform_next(state) < prob[k]:
        return k
    return alias[k]


@njit(**_JIT)
def alias_build(weights, prob, alias):
    """Fill Vose alias tables for nonnegative weights (at least one > 0).

    Zero-weight entries get acceptance probability exactly 0.0 so they are
    never returned by alias_draw. Returns 0 on success, 1 if a zero-weight
    entry could not be paired (cannot happen for valid input).
    """
    n = weights.shape[0]
    total = 0.0
    for i in range(n):
        total += weights[i]
    scaled = np.empty(n, dtype=np.float64)
    for i in range(n):
        scaled[i] = weights[i] * n / total

    small = np.empty(n, dtype=np.int64)
    large = np.empty(n, dtype=np.int64)
    ns = 0
    nl = 0
    # Queue zero entries last so the LIFO pops them first, while the large
    # queue is still guaranteed nonempty.
    for i in range(n):
        if scaled[i] >= 1.0:
            large[nl] = i
            nl += 1
        elif scaled[i] > 0.0:
            small[ns] = i
            ns += 1
    for i in range(n):
        if scaled[i] == 0.0:
            small[ns] = i
            ns += 1

    while ns > 0 and nl > 0:
        ns -= 1
        l = small[ns]
        nl -= 1
        g = large[nl]
        prob[l] = scaled[l]
        alias[l] = g
        scaled[g] = (scaled[g] + scaled[l]) - 1.0
        if scaled[g] >= 1.0:
            large[nl] = g
            nl += 1
        else:
            small[ns] = g
            ns += 1

    status = 0
    while nl > 0:
        nl -= 1
        g = large[nl]
        prob[g] = 1.0
        alias[g] = g
    while ns > 0:
        ns -= 1
        l = small[ns]
        if weights[l] == 0.0:
            status = 1
        prob[l] = 1.0
        alias[l] = l
    return status


@njit(inline="always")
def _project_step(A, b, row_sq, prob, alias, state, x, omega, mu):
    """One sampled-row projection: x <- mu * (x + omega * correction)."""
    d = A.shape[1]
    k = alias_draw(state, prob, alias)
    dot = 0.0
    for l in range(d):
        dot += A[k, l] * x[l]
    c = omega * ((b[k] - dot) / row_sq[k])
    for l in range(d):
        x[l] = mu * (x[l] + c * A[k, l])


@njit(inline="always")
def _kahan_add(total, comp, x):
    for l in range(x.shape[0]):
        y = x[l] - comp[l]
        t = total[l] + y
        comp[l] = (t - total[l]) - y
        total[l] = t


@njit(**_JIT)
def advance(A, b, row_sq, prob, alias, state, x, nsteps, omega, mu):
    for _ in range(nsteps):
        _project_step(A, b, row_sq, prob, alias, state, x, omega, mu)


@njit(**_JIT)
def advance_tail(A, b, row_sq, prob, alias, state, x, nsteps, omega, mu,
                 total, comp):
    """Advance while Kahan-accumulating every produced iterate."""
    for _ in range(nsteps):
        _project_step(A, b, row_sq, prob, alias, state, x, omega, mu)
        _kahan_add(total, comp, x)


@njit(**_JIT)
def advance_tail2(A, b, row_sq, prob, alias, state, x, nsteps, omega, mu,
                  total_a, comp_a, total_b, comp_b):
    """advance_tail feeding two independent accumulators.

    Accumulator a sees exactly the same op sequence as in advance_tail, so
    its contents stay bitwise comparable with a single-accumulator run.
    """
    for _ in range(nsteps):
        _project_step(A, b, row_sq, prob, alias, state, x, omega, mu)
        _kahan_add(total_a, comp_a, x)
        _kahan_add(total_b, comp_b, x)


@njit(**_JIT)
def kahan_add_vec(total, comp, x):
    _kahan_add(total, comp, x)


@njit(**_JIT)
def advance_averaged(A, b, row_sq, prob, alias, state, x, nouter, q, scratch):
    """Outer steps averaging q independent single-row corrections.

    scratch is a length-d work vector. q = 1 reproduces advance() bitwise:
    the lone correction divided by 1.0 is exact.
    """
    d = A.shape[1]
    for _ in range(nouter):
        for l in range(d):
            scratch[l] = 0.0
        for _ in range(q):
            k = alias_draw(state, prob, alias)
            dot = 0.0
            for l in range(d):
                dot += A[k, l] * x[l]
            c = (b[k] - dot) / row_sq[k]
            for l in range(d):
                scratch[l] += c * A[k, l]
        for l in range(d):
            x[l] = x[l] + scratch[l] / q



@njit(**_JIT)
def advance_dual(A, b, row_sq, prob, alias, state, x, y, lam, nsteps):
    """Dual coordinate updates for the ridge system.

    Maintains the full-length dual vector y with x = A^T y; each step
    relaxes the sampled dual coordinate exactly.
    """
    d = A.shape[1]
    for _ in range(nsteps):
        k = alias_draw(state, prob, alias)
        dot = 0.0
        for l in range(d):
            dot += A[k, l] * x[l]
        delta = (b[k] - dot - lam * y[k]) / (row_sq[k] + lam)
        y[k] += delta
        for l in range(d):
            x[l] += delta * A[k, l]


@njit(**_JIT)
def volume_sample_rows(Q, state, picked):
    """Sample r = Q.shape[1] distinct rows with probability det(Q_S)^2.

    Sequential projection-DPP chain: pick a row by current leverage, then
    project the remaining rows orthogonally to the picked one. Exact for Q
    with orthonormal columns. Q is destroyed; picked gets the r indices.
    """
    n = Q.shape[0]
    r = Q.shape[1]
    lev = np.empty(n, dtype=np.float64)
    v = np.empty(r, dtype=np.float64)
    for step in range(r):
        total = 0.0
        for i in range(n):
            s = 0.0
            for l in range(r):
                s += Q[i, l] * Q[i, l]
            lev[i] = s
            total += s
        u = uniform_next(state) * total
        acc = 0.0
        k = -1
        for i in range(n):
            if lev[i] <= 0.0:
                continue
            k = i  # last positive-leverage row doubles as rounding fallback
            acc += lev[i]
            if u < acc:
                break
        if k < 0:
            return 1
        picked[step] = k
        nrm = np.sqrt(lev[k])
        if nrm == 0.0:
            return 1  # degenerate: rank of remainder fell short
        for l in range(r):
            v[l] = Q[k, l] / nrm
        for i in range(n):
            s = 0.0
            for l in range(r):
                s += Q[i, l] * v[l]
            for l in range(r):
                Q[i, l] -= s * v[l]
    return 0


@njit(**_JIT)
def volume_sample_many(Q, state, out):
    """Batch of volume-sampled subsets: out is (count, r). Q is preserved."""
    scratch = np.empty_like(Q)
    for j in range(out.shape[0]):
        scratch[:, :] = Q
        status = volume_sample_rows(scratch, state, out[j])
        if status != 0:
            return 1
    return 0

"""Compiled inner loops. Symbols are 0-based ``int64``; sequences are ``(M, L)``."""
import math

import numpy as np
from numba import njit

_TINY = 1e-300


@njit(cache=True)
def hmm_loglik_batch(A, C, prior, seqs):
    M, L = seqs.shape
    n = A.shape[0]
    out = np.empty(M)
    alpha = np.empty(n)
    nxt = np.empty(n)
    for m in range(M):
        for i in range(n):
            alpha[i] = prior[i]
        ll = 0.0
        for t in range(L):
            y = seqs[m, t]
            c = 0.0
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += A[i, j] * alpha[j]
                nxt[i] = C[y, i] * acc
                c += nxt[i]
            if c < _TINY:
                ll = -np.inf
                break
            for i in range(n):
                alpha[i] = nxt[i] / c
            ll += math.log(c)
        out[m] = ll
    return out


@njit(cache=True)
def hmm_em_stats(A, C, prior, seqs):
    """Expected sufficient statistics for one EM step.

    Returns ``(loglik, trans, emit, first)`` where ``trans[i, j]`` counts
    ``j -> i`` transitions, ``emit[y, i]`` counts state ``i`` emitting ``y``
    and ``first`` is the summed posterior over the initial (pre-emission) state.
    """
    M, L = seqs.shape
    n = A.shape[0]
    s = C.shape[0]
    trans = np.zeros((n, n))
    emit = np.zeros((s, n))
    first = np.zeros(n)
    alpha = np.empty((L + 1, n))
    beta = np.empty((L + 1, n))
    scale = np.empty(L + 1)
    total = 0.0
    for m in range(M):
        for i in range(n):
            alpha[0, i] = prior[i]
        for t in range(1, L + 1):
            y = seqs[m, t - 1]
            c = 0.0
            for i in range(n):
                acc = 0.0
                for j in range(n):
                    acc += A[i, j] * alpha[t - 1, j]
                alpha[t, i] = C[y, i] * acc
                c += alpha[t, i]
            if c < _TINY:
                return -np.inf, trans, emit, first
            for i in range(n):
                alpha[t, i] /= c
            scale[t] = c
            total += math.log(c)
        for i in range(n):
            beta[L, i] = 1.0
        for t in range(L, 0, -1):
            y = seqs[m, t - 1]
            for j in range(n):
                acc = 0.0
                for i in range(n):
                    acc += A[i, j] * C[y, i] * beta[t, i]
                beta[t - 1, j] = acc / scale[t]
        for j in range(n):
            first[j] += alpha[0, j] * beta[0, j]
        for t in range(1, L + 1):
            y = seqs[m, t - 1]
            for i in range(n):
                emit[y, i] += alpha[t, i] * beta[t, i]
                w = C[y, i] * beta[t, i] / scale[t]
                for j in range(n):
                    trans[i, j] += alpha[t - 1, j] * A[i, j] * w
    return total, trans, emit, first


@njit(cache=True)
def _matmul(a, b, out):
    n = a.shape[0]
    k = a.shape[1]
    p = b.shape[1]
    for i in range(n):
        for j in range(p):
            acc = 0j
            for r in range(k):
                acc += a[i, r] * b[r, j]
            out[i, j] = acc


@njit(cache=True)
def _sandwich_sum(ops, y, rho, tmp, out):
    """``out = sum_k ops[y, k] rho ops[y, k]^dagger``; returns the real trace."""
    w = ops.shape[1]
    n = rho.shape[0]
    for i in range(n):
        for j in range(n):
            out[i, j] = 0j
    for k in range(w):
        K = ops[y, k]
        _matmul(K, rho, tmp)
        for i in range(n):
            for j in range(n):
                acc = 0j
                for r in range(n):
                    acc += tmp[i, r] * K[j, r].conjugate()
                out[i, j] += acc
    tr = 0.0
    for i in range(n):
        tr += out[i, i].real
    return tr


@njit(cache=True)
def hqmm_loglik_generic(ops, rho0, seqs):
    M, L = seqs.shape
    n = rho0.shape[0]
    out = np.empty(M)
    rho = np.empty((n, n), dtype=np.complex128)
    tmp = np.empty((n, n), dtype=np.complex128)
    num = np.empty((n, n), dtype=np.complex128)
    for m in range(M):
        rho[:, :] = rho0
        ll = 0.0
        for t in range(L):
            tr = _sandwich_sum(ops, seqs[m, t], rho, tmp, num)
            if tr < _TINY:
                ll = -np.inf
                break
            for i in range(n):
                for j in range(n):
                    rho[i, j] = 0.5 * (num[i, j] + num[j, i].conjugate()) / tr
            ll += math.log(tr)
        out[m] = ll
    return out


@njit(cache=True)
def hqmm_loglik_product(ops, rho0, seqs):
    """Single-branch fast path: accumulate ``K_{y_L} ... K_{y_1}`` with rescaling."""
    M, L = seqs.shape
    n = rho0.shape[0]
    out = np.empty(M)
    prod = np.empty((n, n), dtype=np.complex128)
    tmp = np.empty((n, n), dtype=np.complex128)
    for m in range(M):
        for i in range(n):
            for j in range(n):
                prod[i, j] = 1.0 if i == j else 0.0
        ll = 0.0
        dead = False
        for t in range(L):
            _matmul(ops[seqs[m, t], 0], prod, tmp)
            f = 0.0
            for i in range(n):
                for j in range(n):
                    f += tmp[i, j].real ** 2 + tmp[i, j].imag ** 2
            if f < _TINY:
                dead = True
                break
            f = math.sqrt(f)
            for i in range(n):
                for j in range(n):
                    prod[i, j] = tmp[i, j] / f
            ll += 2.0 * math.log(f)
        if dead:
            out[m] = -np.inf
            continue
        _matmul(prod, rho0, tmp)
        tr = 0.0
        for i in range(n):
            for r in range(n):
                tr += (tmp[i, r] * prod[i, r].conjugate()).real
        out[m] = ll + math.log(tr) if tr > _TINY else -np.inf
    return out


@njit(cache=True)
def hqmm_sample(ops, rho0, uniforms):
    s = ops.shape[0]
    n = rho0.shape[0]
    L = uniforms.shape[0]
    out = np.empty(L, dtype=np.int64)
    rho = rho0.copy()
    tmp = np.empty((n, n), dtype=np.complex128)
    nums = np.empty((s, n, n), dtype=np.complex128)
    probs = np.empty(s)
    for t in range(L):
        total = 0.0
        for y in range(s):
            probs[y] = max(_sandwich_sum(ops, y, rho, tmp, nums[y]), 0.0)
            total += probs[y]
        u = uniforms[t] * total
        y = s - 1
        acc = 0.0
        for k in range(s):
            acc += probs[k]
            if u < acc:
                y = k
                break
        while probs[y] <= 0.0:
            y -= 1
        out[t] = y
        for i in range(n):
            for j in range(n):
                rho[i, j] = 0.5 * (nums[y, i, j] + nums[y, j, i].conjugate()) / probs[y]
    return out


@njit(cache=True)
def _draw(cdf_col, u):
    k = cdf_col.shape[0]
    for i in range(k):
        if u < cdf_col[i]:
            return i
    return k - 1


@njit(cache=True)
def hmm_sample(A_cdf, C_cdf, prior_cdf, u0, uniforms):
    """``uniforms`` has shape ``(L, 2)``: one draw for the transition, one for the emission."""
    L = uniforms.shape[0]
    out = np.empty(L, dtype=np.int64)
    z = _draw(prior_cdf, u0)
    for t in range(L):
        z = _draw(A_cdf[:, z], uniforms[t, 0])
        out[t] = _draw(C_cdf[:, z], uniforms[t, 1])
    return out

"""Hot reduction kernels, compiled with numba when available.

Every kernel exists twice: a ``*_nb`` loop version compiled with ``@njit``
and a ``*_np`` vectorized numpy version.  The public name (without suffix)
is bound to one of the two at import time.  Set ``NHFLOQUET_DISABLE_NUMBA=1``
to force the pure-numpy path (useful for debugging and for the benchmark in
``benchmarks/bench_kernels.py``).
"""
import os

import numpy as np

_FLAG = os.environ.get("NHFLOQUET_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def _njit(fn):
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# ---------------------------------------------------------------- IPR
def ipr_columns_np(vecs):
    """Sum of |v_n|^4 down each column."""
    a2 = vecs.real ** 2 + vecs.imag ** 2
    return np.einsum("ij,ij->j", a2, a2)


@_njit
def ipr_columns_nb(vecs):
    L, M = vecs.shape
    out = np.zeros(M)
    for j in range(M):
        acc = 0.0
        for i in range(L):
            z = vecs[i, j]
            a2 = z.real * z.real + z.imag * z.imag
            acc += a2 * a2
        out[j] = acc
    return out


# ---------------------------------------------------------------- gap ratios
def gap_ratios_np(levels):
    """Adjacent gap ratios of an already sorted real sequence.

    A pair of zero spacings gives ratio 1 (limit of equal spacings).
    """
    eps = np.diff(levels)
    a, b = eps[:-1], eps[1:]
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    out = np.ones_like(hi)
    nz = hi != 0.0
    out[nz] = lo[nz] / hi[nz]
    return out


@_njit
def gap_ratios_nb(levels):
    n = levels.shape[0]
    out = np.ones(n - 2)
    for j in range(1, n - 1):
        a = levels[j] - levels[j - 1]
        b = levels[j + 1] - levels[j]
        hi = a if a > b else b
        lo = b if a > b else a
        if hi != 0.0:
            out[j - 1] = lo / hi
    return out


# ---------------------------------------------------------------- moments
def moments_np(psi, pos):
    """Return (norm^2, sum pos*p, sum pos^2*p) with p = |psi|^2."""
    p = psi.real ** 2 + psi.imag ** 2
    return p.sum(), (pos * p).sum(), (pos * pos * p).sum()


@_njit
def moments_nb(psi, pos):
    s0 = 0.0
    s1 = 0.0
    s2 = 0.0
    for i in range(psi.shape[0]):
        z = psi[i]
        p = z.real * z.real + z.imag * z.imag
        s0 += p
        s1 += pos[i] * p
        s2 += pos[i] * pos[i] * p
    return s0, s1, s2


def lifted_moments_np(psi, pos, center, L):
    """Moments of |psi|^2 on the ring unrolled around ``center``.

    Each site is assigned the image of its position closest to ``center``
    (displacement in [-L/2, L/2)).  Returns (norm^2, sum d*p, sum d^2*p)
    with d the displacement from ``center``.
    """
    d = np.mod(pos - center + 0.5 * L, L) - 0.5 * L
    p = psi.real ** 2 + psi.imag ** 2
    return p.sum(), (d * p).sum(), (d * d * p).sum()


@_njit
def lifted_moments_nb(psi, pos, center, L):
    s0 = 0.0
    s1 = 0.0
    s2 = 0.0
    half = 0.5 * L
    for i in range(psi.shape[0]):
        d = (pos[i] - center + half) % L - half
        z = psi[i]
        p = z.real * z.real + z.imag * z.imag
        s0 += p
        s1 += d * p
        s2 += d * d * p
    return s0, s1, s2


# ---------------------------------------------------------------- circulant
def circulant_np(c):
    """Dense matrix X[n, m] = c[(n - m) mod L]."""
    L = c.shape[0]
    idx = np.subtract.outer(np.arange(L), np.arange(L)) % L
    return c[idx]


@_njit
def circulant_nb(c):
    L = c.shape[0]
    out = np.empty((L, L), dtype=c.dtype)
    for n in range(L):
        for m in range(L):
            k = n - m
            if k < 0:
                k += L
            out[n, m] = c[k]
    return out


if USE_NUMBA:
    ipr_columns = ipr_columns_nb
    gap_ratios = gap_ratios_nb
    moments = moments_nb
    lifted_moments = lifted_moments_nb
    circulant = circulant_nb
else:
    ipr_columns = ipr_columns_np
    gap_ratios = gap_ratios_np
    moments = moments_np
    lifted_moments = lifted_moments_np
    circulant = circulant_np

BACKEND = "numba" if USE_NUMBA else "numpy"

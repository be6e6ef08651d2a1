"""One-period evolution: matrix exponentials, the Floquet operator and its
truncated BCH effective Hamiltonian."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import ModelParams, build_kinetic, build_potential_diag


class ExpmError(ArithmeticError):
    """Matrix exponential outside the range where it can be trusted."""


# Higham (2005) Pade coefficients and backward-error thresholds (1-norm).
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}
_MAX_SQUARINGS = 64


def _pade_low(A, m):
    b = _PADE[m]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    P = ident
    U = b[1] * ident
    V = b[0] * ident
    for k in range(1, m // 2 + 1):
        P = P @ A2
        U = U + b[2 * k + 1] * P
        V = V + b[2 * k] * P
    return A @ U, V


def _pade13(A):
    b = _PADE[13]
    ident = np.eye(A.shape[0], dtype=A.dtype)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
             + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
         + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    return U, V


def expm_dense(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a diagonal Pade core.

    Uses the degree selection of Higham's 2005 algorithm (degrees 3-13).
    Raises ``ExpmError`` if the input is non-finite, the required number of
    squarings exceeds the validated range, or the result overflows.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("expm_dense needs a square matrix")
    if not np.all(np.isfinite(A)):
        raise ExpmError("non-finite entries in exponent")
    A = A.astype(complex if np.iscomplexobj(A) else float, copy=False)
    norm1 = np.abs(A).sum(axis=0).max() if A.size else 0.0
    if norm1 == 0.0:
        return np.eye(A.shape[0], dtype=A.dtype)

    s = 0
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            U, V = _pade_low(A, m)
            break
    else:
        s = max(0, int(math.ceil(math.log2(norm1 / _THETA[13]))))
        if s > _MAX_SQUARINGS:
            raise ExpmError(f"||A||_1 = {norm1:.3e} needs {s} squarings; beyond validated range")
        U, V = _pade13(A / 2.0 ** s)

    R = np.linalg.solve(V - U, V + U)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(s):
            R = R @ R
    if not np.all(np.isfinite(R)):
        raise ExpmError("matrix exponential overflowed")
    return R


def circulant_symbol(params: ModelParams) -> np.ndarray:
    """Eigenvalues exp(-i 2 Jd cos(k_m - i gamma)), k_m = 2 pi m / L."""
    k = 2.0 * np.pi * np.arange(params.L) / params.L
    return np.exp(-2j * params.Jd * np.cos(k - 1j * params.gamma))


def expm_hopping_circulant(params: ModelParams) -> np.ndarray:
    """exp(-i T1 K / hbar) for the standard PBC chain via its Fourier diagonalization.

    The hopping operator is circulant, so X[n, m] = c[(n - m) mod L] with c the
    inverse DFT of the symbol.
    """
    if params.variant != "standard":
        raise ValueError("circulant fast path needs the standard (translation-invariant) hopping")
    c = np.fft.ifft(circulant_symbol(params))
    return kernels.circulant(np.ascontiguousarray(c))


@dataclass(frozen=True)
class FloquetOperator:
    matrix: np.ndarray
    params: ModelParams
    build_path: str  # "circulant" | "dense_expm"

    @property
    def L(self) -> int:
        return self.matrix.shape[0]


def potential_phases(params: ModelParams) -> np.ndarray:
    """Diagonal of exp(-i T2 V / hbar)."""
    return np.exp(-1j * (params.T2 / params.hbar) * build_potential_diag(params))


def hopping_propagator(params: ModelParams, path: str = "auto") -> tuple[np.ndarray, str]:
    if path not in ("auto", "circulant", "dense_expm"):
        raise ValueError(f"unknown build path {path!r}")
    if params.variant == "standard" and path in ("auto", "circulant"):
        return expm_hopping_circulant(params), "circulant"
    if path == "circulant":
        raise ValueError("circulant path is only available for the standard variant")
    X = expm_dense(-1j * (params.T1 / params.hbar) * build_kinetic(params))
    return X, "dense_expm"


def build_floquet_operator(params: ModelParams, path: str = "auto") -> FloquetOperator:
    """U = exp(-i Vd cos(2 pi alpha n)) exp(-i Jd K/J); potential factor on the left."""
    X, used = hopping_propagator(params, path)
    D = potential_phases(params)
    return FloquetOperator(D[:, None] * X, params, used)


_ORDERS = {"T0": 0, "T1": 1, "T2": 2, 0: 0, 1: 1, 2: 2}


def build_bch_heff(params: ModelParams, order="T2") -> np.ndarray:
    """Effective Hamiltonian from the BCH series truncated at ``order``.

    With H1 = K T1/T and H2 = V T2/T::

        H_eff = H1 + H2 + (iT/2)[H1, H2] + (T^2/12 hbar^2)[H2 - H1, [H1, H2]]

    Orders T1 and T2 are only defined here for hbar = 1.
    """
    try:
        k = _ORDERS[order]
    except KeyError:
        raise ValueError(f"order must be one of T0, T1, T2; got {order!r}") from None
    if k >= 1 and params.hbar != 1.0:
        raise ValueError("BCH corrections are implemented for hbar = 1 only")
    T = params.T
    H1 = build_kinetic(params) * (params.T1 / T)
    h2 = build_potential_diag(params) * (params.T2 / T)
    H = H1.copy()
    H[np.diag_indices(params.L)] += h2
    if k == 0:
        return H
    # [H1, diag(h2)] = H1 * h2[col] - h2[row] * H1
    C = H1 * h2[None, :] - h2[:, None] * H1
    H += (0.5j * T) * C
    if k == 1:
        return H
    D = -H1
    D[np.diag_indices(params.L)] += h2
    H += (T * T / 12.0) * (D @ C - C @ D)
    return H

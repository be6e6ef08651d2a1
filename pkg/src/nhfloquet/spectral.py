"""Dense non-Hermitian eigendecomposition and quasienergy extraction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import FloquetOperator

RESIDUAL_RTOL = 1e-8


class EigenSolverError(RuntimeError):
    """The dense eigensolver failed to converge."""

    def __init__(self, msg, shape=None, cause=None):
        super().__init__(msg)
        self.shape = shape
        self.cause = cause


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenpairs sorted ascending by Re E, ties by Im E.

    ``eigenvectors[:, j]`` is the unit-norm right eigenvector belonging to
    ``quasienergies[j]``.  For ``kind == "hamiltonian"`` the values are plain
    eigenvalues (no branch folding).
    """

    quasienergies: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    kind: str
    matrix_norm: float

    @property
    def L(self) -> int:
        return self.quasienergies.shape[0]

    @property
    def degraded(self) -> bool:
        return bool(np.any(self.residuals > RESIDUAL_RTOL * max(self.matrix_norm, 1.0)))


def eig_general(M: np.ndarray):
    """All eigenpairs of a general complex matrix.

    Returns ``(mu, vecs, residuals)`` with unit 2-norm columns and
    residuals ||M v - mu v||_2.
    """
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("eig_general needs a square matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    try:
        mu, vecs = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge for {M.shape} matrix: {exc}",
                               shape=M.shape, cause=exc) from exc
    vecs = vecs / np.linalg.norm(vecs, axis=0)
    residuals = np.linalg.norm(M @ vecs - vecs * mu, axis=0)
    return mu, vecs, residuals


def fold_real_part(re):
    """Map real parts onto the principal branch (-pi, pi]."""
    re = np.asarray(re, dtype=float)
    return np.pi - np.mod(np.pi - re, 2.0 * np.pi)


def fold_quasienergies(E):
    E = np.asarray(E, dtype=complex)
    return fold_real_part(E.real) + 1j * E.imag


def quasienergies_from_eigenvalues(mu):
    """E = i ln(mu) on the principal branch: Re E = -arg mu in (-pi, pi], Im E = ln|mu|."""
    mu = np.asarray(mu, dtype=complex)
    absmu = np.abs(mu)
    if np.any(absmu == 0.0):
        raise ValueError("zero eigenvalue of a Floquet operator (broken operator build)")
    re = fold_real_part(-np.angle(mu)) + 0.0  # + 0.0 turns -0.0 into 0.0
    return re + 1j * np.log(absmu)


def canonical_order(E) -> np.ndarray:
    """Indices sorting ascending by Re E, ties broken by Im E."""
    E = np.asarray(E)
    return np.lexsort((E.imag, E.real))


def solve_spectrum(op, kind: str | None = None) -> SpectrumResult:
    """Diagonalize a Floquet operator or a static Hamiltonian.

    ``kind`` defaults to ``"floquet"`` for a ``FloquetOperator`` and must be
    given explicitly for a bare matrix.
    """
    if isinstance(op, FloquetOperator):
        M = op.matrix
        kind = kind or "floquet"
    else:
        M = np.asarray(op)
        if kind is None:
            raise ValueError("kind ('floquet' or 'hamiltonian') is required for a bare matrix")
    if kind not in ("floquet", "hamiltonian"):
        raise ValueError(f"unknown spectrum kind {kind!r}")
    mu, vecs, res = eig_general(M)
    E = quasienergies_from_eigenvalues(mu) if kind == "floquet" else mu.astype(complex)
    order = canonical_order(E)
    return SpectrumResult(
        quasienergies=E[order],
        eigenvectors=np.ascontiguousarray(vecs[:, order]),
        residuals=res[order],
        kind=kind,
        matrix_norm=float(np.abs(M).sum(axis=0).max()),
    )

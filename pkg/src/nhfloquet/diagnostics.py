"""Spectral and localization measures of a diagonalized operator.

Conventions
-----------
* A quasienergy is "non-real" when |Im E| > eps_im (default 1e-8).
* The mean adjacent gap ratio divides by the number of ratios, L - 2.
* A state counts as localized when IPR_j > L**(-loc_exponent), default
  exponent 1/2 (geometric midpoint between the 1/L and O(1) scalings).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from . import kernels
from .spectral import SpectrumResult, canonical_order

EPS_IM = 1e-8
LOC_EXPONENT = 0.5
SENSITIVITY_FACTORS = (1e-2, 1.0, 1e2)


class Phase(str, Enum):
    EXTENDED = "Extended"
    LOCALIZED = "Localized"
    CRITICAL = "Critical"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DiagnosticsSummary:
    max_im_e: float
    rho: float
    agr_mean: float
    ipr_ave: float
    npr_ave: float
    ipr_max: float
    ipr_min: float
    zeta: float
    phase: Phase
    n_localized: int
    eps_im: float
    loc_exponent: float
    L: int
    rho_sensitivity: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["phase"] = self.phase.value
        d["rho_sensitivity"] = [list(p) for p in self.rho_sensitivity]
        return d


def _energies(spectrum):
    if isinstance(spectrum, SpectrumResult):
        return spectrum.quasienergies
    return np.asarray(spectrum, dtype=complex)


def max_im_e(spectrum) -> float:
    E = _energies(spectrum)
    if E.size == 0:
        raise ValueError("empty spectrum")
    return float(np.max(np.abs(E.imag)))


def dos_complex(spectrum, eps_im: float = EPS_IM) -> float:
    """Fraction of states with |Im E| > eps_im."""
    if not eps_im > 0:
        raise ValueError("eps_im must be positive")
    E = _energies(spectrum)
    return float(np.count_nonzero(np.abs(E.imag) > eps_im)) / E.size


def gap_ratios(spectrum) -> np.ndarray:
    E = _energies(spectrum)
    re = np.ascontiguousarray(E.real[canonical_order(E)], dtype=float)
    return kernels.gap_ratios(re)


def agr_mean(spectrum) -> float:
    """Mean adjacent gap ratio of the Re-sorted spectrum (needs L >= 3)."""
    E = _energies(spectrum)
    if E.size < 3:
        raise ValueError("adjacent gap ratios need at least 3 levels")
    return float(np.mean(gap_ratios(E)))


def participation_ratios(spectrum, atol: float = 1e-10):
    """Per-state (IPR, NPR) of unit-norm right eigenvectors (columns)."""
    vecs = spectrum.eigenvectors if isinstance(spectrum, SpectrumResult) else np.asarray(spectrum)
    if vecs.ndim == 1:
        vecs = vecs[:, None]
    norms = np.linalg.norm(vecs, axis=0)
    if np.any(np.abs(norms - 1.0) > atol):
        raise ValueError("participation ratios need unit-norm eigenvectors")
    L = vecs.shape[0]
    ipr = kernels.ipr_columns(np.ascontiguousarray(vecs, dtype=complex))
    npr = 1.0 / (L * ipr)
    return ipr, npr


def aggregates(ipr, npr) -> dict:
    ipr = np.asarray(ipr, dtype=float)
    npr = np.asarray(npr, dtype=float)
    ipr_ave = float(ipr.mean())
    npr_ave = float(npr.mean())
    return {
        "ipr_ave": ipr_ave,
        "npr_ave": npr_ave,
        "ipr_max": float(ipr.max()),
        "ipr_min": float(ipr.min()),
        "zeta": math.log10(ipr_ave * npr_ave),
    }


def localized_mask(ipr, L: int, loc_exponent: float = LOC_EXPONENT) -> np.ndarray:
    return np.asarray(ipr) > float(L) ** (-loc_exponent)


def classify_phase(ipr, L: int, loc_exponent: float = LOC_EXPONENT) -> Phase:
    """Extended if no state is localized, Localized if all are, Critical otherwise."""
    n_loc = int(np.count_nonzero(localized_mask(ipr, L, loc_exponent)))
    if n_loc == 0:
        return Phase.EXTENDED
    if n_loc == len(ipr):
        return Phase.LOCALIZED
    return Phase.CRITICAL


def summarize(spectrum: SpectrumResult, eps_im: float = EPS_IM,
              loc_exponent: float = LOC_EXPONENT) -> DiagnosticsSummary:
    E = spectrum.quasienergies
    L = E.size
    ipr, npr = participation_ratios(spectrum)
    agg = aggregates(ipr, npr)
    n_loc = int(np.count_nonzero(localized_mask(ipr, L, loc_exponent)))
    sens = tuple((eps_im * f, dos_complex(E, eps_im * f)) for f in SENSITIVITY_FACTORS)
    return DiagnosticsSummary(
        max_im_e=max_im_e(E),
        rho=dos_complex(E, eps_im),
        agr_mean=agr_mean(E) if L >= 3 else float("nan"),
        phase=classify_phase(ipr, L, loc_exponent),
        n_localized=n_loc,
        eps_im=eps_im,
        loc_exponent=loc_exponent,
        L=L,
        rho_sensitivity=sens,
        **agg,
    )


# ---------------------------------------------------------------- Lyapunov
@dataclass(frozen=True)
class LyapunovFit:
    """Decay rates of a localized state's two tails.

    ``rate`` is the slower of the two (the inverse localization length);
    ``reliable`` is False when either usable tail has fewer than
    ``min_points`` sites in its fit window.
    """

    rate: float
    left: float
    right: float
    n_left: int
    n_right: int
    reliable: bool


def _tail_fit(logr, lo, hi):
    # contiguous window from the first site below `lo` to the first below `hi`
    below_lo = np.flatnonzero(logr < lo)
    if below_lo.size == 0:
        return math.nan, 0
    start = below_lo[0]
    below_hi = np.flatnonzero(logr < hi)
    below_hi = below_hi[below_hi > start]
    stop = below_hi[0] if below_hi.size else logr.size
    k = np.arange(start, stop)
    if k.size < 2:
        return math.nan, int(k.size)
    slope = np.polyfit(k.astype(float), logr[start:stop], 1)[0]
    return float(-slope), int(k.size)


def lyapunov_estimate(psi, loc_exponent: float = LOC_EXPONENT,
                      window=(1e-2, 1e-12), min_points: int = 10) -> LyapunovFit:
    """Fit exponential decay of |psi_n| away from its maximum (PBC distances).

    Each side is fitted separately by least squares of ln|psi_n/psi_max|
    against distance, over the sites where the relative amplitude has
    dropped below ``window[0]`` but not yet below ``window[1]``.  The core
    above ``window[0]`` is excluded because it is not yet in the
    asymptotic regime; the floor keeps rounding noise out.
    """
    psi = np.asarray(psi)
    L = psi.size
    a = np.abs(psi)
    ipr = float(np.sum(a ** 4) / np.sum(a ** 2) ** 2)
    if ipr <= L ** (-loc_exponent):
        raise ValueError(f"state is not localized (IPR {ipr:.3g} <= L^-{loc_exponent})")
    m = int(np.argmax(a))
    with np.errstate(divide="ignore"):
        logr = np.log(a / a[m])
    half = L // 2
    dist = np.arange(half + 1)
    right = logr[(m + dist) % L]
    left = logr[(m - dist) % L]
    lo, hi = math.log(window[0]), math.log(window[1])
    r_rate, n_r = _tail_fit(right, lo, hi)
    l_rate, n_l = _tail_fit(left, lo, hi)
    rates = [r for r, n in ((l_rate, n_l), (r_rate, n_r)) if n >= 2 and math.isfinite(r)]
    rate = min(rates) if rates else math.nan
    reliable = n_l >= min_points and n_r >= min_points
    return LyapunovFit(rate, l_rate, r_rate, n_l, n_r, reliable)

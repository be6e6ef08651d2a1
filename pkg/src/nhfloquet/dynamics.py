"""Stroboscopic wavepacket evolution and its position observables.

Positions are reported on a centered axis n' = n - offset (default offset
floor(L/2)), so the default initial delta sits at n' = 0.

Two frames are available for the moments:

``"fixed"``
    n' is taken literally on the finite ring, n' in [1 - offset, L - offset].
``"lifted"``
    The ring is unrolled onto the infinite chain by following the packet:
    every period each site is assigned the periodic image closest to the
    previous center.  This reproduces the observables of an unbounded
    lattice for as long as the packet stays narrower than the ring, and
    avoids the artificial jump when a drifting packet crosses the seam.
    Default.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .evolution import FloquetOperator

_NORM_FLOOR = 1e-250
_NORM_CEIL = 1e250


class DynamicsError(ArithmeticError):
    """Wavepacket norm under- or overflowed before renormalization."""


@dataclass
class Trajectory:
    times: np.ndarray
    x: np.ndarray
    x_sd: np.ndarray
    v: np.ndarray
    offset: int
    frame: str
    snapshots: np.ndarray | None = None
    snapshot_periods: np.ndarray | None = None
    final_state: np.ndarray | None = field(default=None, repr=False)

    @property
    def mean_speed(self) -> float:
        return mean_speed(self)


def centered_positions(L: int, offset: int | None = None) -> np.ndarray:
    if offset is None:
        offset = L // 2
    return np.arange(1, L + 1, dtype=float) - offset


def delta_state(L: int, offset: int | None = None, at: int = 0) -> np.ndarray:
    """Unit excitation on the site with centered coordinate ``at``."""
    if offset is None:
        offset = L // 2
    psi = np.zeros(L, dtype=complex)
    psi[(at + offset - 1) % L] = 1.0
    return psi


def observables(psi, offset: int | None = None):
    """(x, x_sd) of a unit-norm state on the fixed centered axis."""
    psi = np.ascontiguousarray(psi, dtype=complex)
    pos = centered_positions(psi.size, offset)
    s0, s1, s2 = kernels.moments(psi, pos)
    if abs(s0 - 1.0) > 1e-10:
        raise ValueError(f"observables need a unit-norm state (norm^2 = {s0})")
    return s1, _spread(s2, s1)


def _spread(second, mean):
    var = second - mean * mean
    if var < 0.0:
        if var < -1e-12 * max(1.0, second):
            raise ArithmeticError(f"negative variance {var}")
        return 0.0
    return math.sqrt(var)


def spreading_speed(psi, t: float, offset: int | None = None) -> float:
    """v(t) = sqrt(sum n'^2 |psi_n|^2) / t on the fixed centered axis."""
    if not t > 0:
        raise ValueError("t must be positive")
    psi = np.ascontiguousarray(psi, dtype=complex)
    _, _, s2 = kernels.moments(psi, centered_positions(psi.size, offset))
    return math.sqrt(s2) / t


def mean_speed(traj: Trajectory) -> float:
    """Spreading speed averaged over the whole run.

    v(t) already divides the rms displacement by the elapsed time, so the
    average over N periods is v at t = N T.
    """
    return float(traj.v[-1])


def time_averaged_speed(traj: Trajectory) -> float:
    """Arithmetic mean of v(l T) over l = 1..N (includes early transients)."""
    return float(np.mean(traj.v))


def _as_matrix(U):
    if isinstance(U, FloquetOperator):
        return U.matrix, U.params.T
    return np.asarray(U), 1.0


def evolve_stroboscopic(U, psi0=None, n_periods: int = 1000, offset: int | None = None,
                        frame: str = "lifted", normalize: str = "step",
                        snapshot_every: int | None = None, period: float | None = None
                        ) -> Trajectory:
    """Apply U once per period and record x, x_sd and v after each period.

    ``normalize="step"`` renormalizes after every application (canonical);
    ``"readout"`` keeps the raw U^l psi0 and only normalizes the copy used for
    the observables, which is equivalent up to rounding but can overflow.
    """
    M, T = _as_matrix(U)
    if period is not None:
        T = period
    L = M.shape[0]
    if offset is None:
        offset = L // 2
    if n_periods < 1:
        raise ValueError("n_periods must be >= 1")
    if frame not in ("fixed", "lifted"):
        raise ValueError(f"unknown frame {frame!r}")
    if normalize not in ("step", "readout"):
        raise ValueError(f"unknown normalization mode {normalize!r}")
    psi = delta_state(L, offset) if psi0 is None else np.array(psi0, dtype=complex)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise ValueError("initial state must have unit norm")

    pos = centered_positions(L, offset)
    times = T * np.arange(1, n_periods + 1)
    xs = np.empty(n_periods)
    sds = np.empty(n_periods)
    vs = np.empty(n_periods)
    snaps, snap_l = [], []

    # lifted frame: start from the initial center on the fixed axis
    _, c0, _ = kernels.moments(psi, pos)
    center = c0
    for l in range(n_periods):
        psi = M @ psi
        nrm = np.linalg.norm(psi)
        if not (_NORM_FLOOR < nrm < _NORM_CEIL) or not math.isfinite(nrm):
            raise DynamicsError(f"norm {nrm:.3e} out of range at period {l + 1}")
        if normalize == "step":
            psi /= nrm
            phi = psi
        else:
            phi = psi / nrm
        if frame == "fixed":
            _, s1, s2 = kernels.moments(phi, pos)
            x, second = s1, s2
        else:
            _, d1, d2 = kernels.lifted_moments(phi, pos, center, L)
            x = center + d1
            # second moment about the origin of the lifted axis
            second = d2 + 2.0 * center * d1 + center * center
            center = x
        xs[l] = x
        sds[l] = _spread(second, x)
        vs[l] = math.sqrt(max(second, 0.0)) / times[l]
        if snapshot_every and (l + 1) % snapshot_every == 0:
            snaps.append(np.abs(phi))
            snap_l.append(l + 1)

    final = psi if normalize == "step" else psi / np.linalg.norm(psi)
    return Trajectory(
        times=times, x=xs, x_sd=sds, v=vs, offset=offset, frame=frame,
        snapshots=np.array(snaps) if snaps else None,
        snapshot_periods=np.array(snap_l) if snap_l else None,
        final_state=final,
    )


def linear_fit_r2(t, y) -> tuple[float, float]:
    """Slope and coefficient of determination of a least-squares line."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    coef = np.polyfit(t, y, 1)
    resid = y - np.polyval(coef, t)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(r2)

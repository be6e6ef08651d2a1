"""Lattice operators of the static and periodically quenched nonreciprocal
Harper model.

Sites are labelled n = 1..L throughout; array index i holds site n = i + 1.
Only periodic boundary conditions are supported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

VARIANTS = ("standard", "dimerized")


@dataclass(frozen=True)
class ModelParams:
    """Physical and protocol parameters of one model instance.

    ``rational`` selects the rational-approximant mode: when set to
    ``(p, q)`` the potential uses alpha = p/q and the lattice must have
    L = q.  ``None`` means the irrational ``alpha`` is used as given.
    """

    J: float = math.pi / 6
    V: float = 0.0
    gamma: float = 0.0
    L: int = 610
    alpha: float = INV_GOLDEN
    T1: float = 1.0
    T2: float = 1.0
    hbar: float = 1.0
    boundary: str = "periodic"
    variant: str = "standard"
    rational: tuple[int, int] | None = field(default=None)

    def __post_init__(self):
        if not (math.isfinite(self.J) and self.J >= 0):
            raise ValueError(f"J must be finite and >= 0, got {self.J}")
        if not (math.isfinite(self.V) and self.V >= 0):
            raise ValueError(f"V must be finite and >= 0, got {self.V}")
        if not math.isfinite(self.gamma):
            raise ValueError("gamma must be finite")
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f"L must be an integer >= 2, got {self.L}")
        object.__setattr__(self, "L", int(self.L))
        for name in ("T1", "T2", "hbar"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be finite and > 0, got {val}")
        if self.boundary != "periodic":
            raise ValueError(
                f"unsupported boundary {self.boundary!r}: only 'periodic' is implemented")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.rational is not None:
            p, q = (int(x) for x in self.rational)
            if q <= 0 or math.gcd(p, q) != 1:
                raise ValueError(f"rational approximant needs gcd(p, q) = 1, got {(p, q)}")
            if self.L != q:
                raise ValueError(f"rational approximant {p}/{q} requires L = {q}, got L = {self.L}")
            object.__setattr__(self, "rational", (p, q))

    # derived quantities are properties so they can never go stale
    @property
    def Jd(self) -> float:
        """Dimensionless hopping J*T1/hbar."""
        return self.J * self.T1 / self.hbar

    @property
    def Vd(self) -> float:
        """Dimensionless potential V*T2/hbar."""
        return self.V * self.T2 / self.hbar

    @property
    def T(self) -> float:
        return self.T1 + self.T2

    @property
    def alpha_eff(self) -> float:
        if self.rational is None:
            return self.alpha
        p, q = self.rational
        return p / q

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = {
            "J": self.J, "V": self.V, "gamma": self.gamma, "L": self.L,
            "alpha": self.alpha, "T1": self.T1, "T2": self.T2, "hbar": self.hbar,
            "boundary": self.boundary, "variant": self.variant,
            "rational": list(self.rational) if self.rational else None,
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        d = dict(d)
        if d.get("rational") is not None:
            d["rational"] = tuple(d["rational"])
        return cls(**d)


def fibonacci_sizes(lo: int = 1, hi: int = 10**9) -> list[int]:
    """Fibonacci numbers in [lo, hi] (without the repeated leading 1)."""
    out, a, b = [], 1, 2
    while a <= hi:
        if a >= lo:
            out.append(a)
        a, b = b, a + b
    return out


def fibonacci_approximant(L: int) -> tuple[int, int]:
    """(p, q) with q = L and p the preceding Fibonacci number."""
    seq = [1, 1]
    while seq[-1] < L:
        seq.append(seq[-1] + seq[-2])
    if seq[-1] != L:
        raise ValueError(f"{L} is not a Fibonacci number")
    return seq[-2], seq[-1]


def build_hopping_matrix(params: ModelParams) -> np.ndarray:
    """Nonreciprocal nearest-neighbour hopping K under PBC.

    K[n, n+1] = J e^gamma (hopping right-to-left), K[n+1, n] = J e^-gamma,
    wrapped so that K[L, 1] = J e^gamma and K[1, L] = J e^-gamma.
    """
    if params.variant != "standard":
        raise ValueError("build_hopping_matrix is for the standard variant; "
                         "use build_dimerized_hopping")
    L = params.L
    K = np.zeros((L, L), dtype=complex)
    left = params.J * math.exp(params.gamma)
    right = params.J * math.exp(-params.gamma)
    i = np.arange(L)
    j = (i + 1) % L
    # += so that L = 2 (where the wrap bond coincides with the bulk bond) sums
    np.add.at(K, (i, j), left)
    np.add.at(K, (j, i), right)
    return K


def build_dimerized_hopping(params: ModelParams) -> np.ndarray:
    """Dimerized hopping K' with asymmetric odd bonds and symmetric even bonds.

    Odd bonds (2n-1, 2n) carry J e^gamma / J e^-gamma, even bonds (2n, 2n+1)
    carry J in both directions.  The PBC bond (L, 1) is always symmetric:
    for even L it is an even bond anyway, for odd L it closes the ring after
    the last full cell.
    """
    L = params.L
    K = np.zeros((L, L), dtype=complex)
    b = np.arange(L)                   # bond b joins array sites b and b + 1
    nxt = (b + 1) % L
    asym = (b % 2 == 0) & (b != L - 1)
    np.add.at(K, (b[asym], nxt[asym]), params.J * math.exp(params.gamma))
    np.add.at(K, (nxt[asym], b[asym]), params.J * math.exp(-params.gamma))
    np.add.at(K, (b[~asym], nxt[~asym]), params.J)
    np.add.at(K, (nxt[~asym], b[~asym]), params.J)
    return K


def build_kinetic(params: ModelParams) -> np.ndarray:
    """Hopping operator of whichever variant ``params`` selects."""
    if params.variant == "dimerized":
        return build_dimerized_hopping(params)
    return build_hopping_matrix(params)


def build_potential_diag(params: ModelParams) -> np.ndarray:
    """Onsite potential V cos(2 pi alpha n) for n = 1..L."""
    n = np.arange(1, params.L + 1, dtype=float)
    return params.V * np.cos(2.0 * np.pi * params.alpha_eff * n)


def build_static_hamiltonian(params: ModelParams) -> np.ndarray:
    H = build_kinetic(params)
    H[np.diag_indices(params.L)] += build_potential_diag(params)
    return H


def momentum_diagonal(params: ModelParams) -> np.ndarray:
    """W_l = 2 J cos(2 pi alpha l + i gamma), l = 1..L."""
    l = np.arange(1, params.L + 1, dtype=float)
    return 2.0 * params.J * np.cos(2.0 * np.pi * params.alpha_eff * l + 1j * params.gamma)


def build_momentum_hamiltonian(params: ModelParams) -> np.ndarray:
    """Momentum-space form of the static Hamiltonian (rational alpha only).

    Symmetric hopping V/2 between neighbouring momenta (PBC) plus the complex
    diagonal W_l.  Its spectrum coincides with ``build_static_hamiltonian``
    for the same approximant.
    """
    if params.rational is None:
        raise ValueError("momentum representation requires a rational approximant alpha = p/q")
    if params.variant != "standard":
        raise ValueError("momentum representation is defined for the standard variant only")
    L = params.L
    H = np.zeros((L, L), dtype=complex)
    i = np.arange(L)
    j = (i + 1) % L
    np.add.at(H, (i, j), params.V / 2)
    np.add.at(H, (j, i), params.V / 2)
    H[np.diag_indices(L)] += momentum_diagonal(params)
    return H


def static_pt_threshold(J: float, V: float) -> float:
    """gamma_c = -ln(2J/V) of the static model (meaningful for V > 2J)."""
    return -math.log(2.0 * J / V)


def static_lyapunov(J: float, V: float, gamma: float) -> float:
    """Lyapunov exponent ln[V e^-gamma / (2J)] of the static localized phase."""
    return math.log(V * math.exp(-gamma) / (2.0 * J))

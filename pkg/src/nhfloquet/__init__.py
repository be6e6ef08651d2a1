"""Periodically quenched nonreciprocal Harper model: Floquet spectra,
localization diagnostics and wavepacket dynamics."""
__version__ = "0.1.0"

from .model import (  # noqa: E402
    INV_GOLDEN,
    ModelParams,
    build_dimerized_hopping,
    build_hopping_matrix,
    build_momentum_hamiltonian,
    build_potential_diag,
    build_static_hamiltonian,
    fibonacci_approximant,
    fibonacci_sizes,
)
from .evolution import (  # noqa: E402
    FloquetOperator,
    build_bch_heff,
    build_floquet_operator,
    expm_dense,
    expm_hopping_circulant,
)
from .spectral import (  # noqa: E402
    SpectrumResult,
    eig_general,
    quasienergies_from_eigenvalues,
    solve_spectrum,
)
from .diagnostics import (  # noqa: E402
    DiagnosticsSummary,
    Phase,
    classify_phase,
    lyapunov_estimate,
    summarize,
)
from .dynamics import Trajectory, evolve_stroboscopic  # noqa: E402

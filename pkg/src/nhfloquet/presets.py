"""Named run configurations for the figure-reproduction recipes.

Full presets use the lattice sizes of the original figures (slow: minutes
to hours).  ``-desk`` variants use L = 610 or 987 and finish in seconds to
minutes on a laptop.
"""
import math

from .model import fibonacci_sizes

PI = math.pi
FIG3_V = tuple(x * PI for x in (0.2, 0.7, 1.2, 1.7, 2.2, 2.7, 3.1, 3.6))
_MODEL = {"J": PI / 6, "gamma": 0.8}


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step))
    return [lo + k * step for k in range(n + 1)]


def _vsamples(n, hi=4 * PI):
    """n equally spaced samples of V in (0, hi]."""
    return [hi * k / n for k in range(1, n + 1)]


def _build():
    p = {}
    p["fig2"] = {"command": "scan-v", "model": {**_MODEL, "L": 4181},
                 "scan": {"V": _grid(0.0, 4 * PI, 0.02 * PI)}, "run": {"dynamics": True}}
    p["fig2-desk"] = {"command": "scan-v", "model": {**_MODEL, "L": 987},
                      "scan": {"V": list(FIG3_V)}, "run": {"dynamics": True}}
    for letter, V in zip("abcdefgh", FIG3_V):
        p[f"fig3{letter}"] = {"command": "spectrum", "model": {**_MODEL, "L": 4181, "V": V}}
        p[f"fig3{letter}-desk"] = {"command": "spectrum", "model": {**_MODEL, "L": 987, "V": V}}
    p["fig4"] = {"command": "ipr-scaling", "model": dict(_MODEL),
                 "scan": {"L": fibonacci_sizes(89, 6765), "V": list(FIG3_V)}}
    p["fig4-desk"] = {"command": "ipr-scaling", "model": dict(_MODEL),
                      "scan": {"L": fibonacci_sizes(89, 987), "V": list(FIG3_V)}}
    # axis ranges of the phase diagram are a reconstruction (not given numerically)
    p["fig5"] = {"command": "phase-diagram", "model": {"J": PI / 6, "L": 2584},
                 "scan": {"gamma": _grid(0.0, 1.6, 0.05), "V": _grid(0.0, 4 * PI, 0.05 * PI)}}
    p["fig5-desk"] = {"command": "phase-diagram", "model": {"J": PI / 6, "L": 610},
                      "scan": {"gamma": _grid(0.0, 1.6, 0.2), "V": _grid(0.0, 4 * PI, 0.2 * PI)}}
    p["fig6"] = {"command": "dynamics", "model": {**_MODEL, "L": 4181},
                 "scan": {"V": list(FIG3_V)}, "run": {"periods": 1000, "heatmap": True}}
    p["fig6-desk"] = {"command": "dynamics", "model": {**_MODEL, "L": 987},
                      "scan": {"V": list(FIG3_V)}, "run": {"periods": 1000, "heatmap": True,
                                                           "thin": 5}}
    p["fig7"] = {"command": "variant", "model": {**_MODEL, "L": 4181},
                 "scan": {"V": _vsamples(200)}, "run": {"kind": "heff"}}
    p["fig7-desk"] = {"command": "variant", "model": {**_MODEL, "L": 610},
                      "scan": {"V": _vsamples(40)}, "run": {"kind": "heff"}}
    p["fig8"] = {"command": "variant", "model": {**_MODEL, "L": 2584},
                 "scan": {"V": _vsamples(200)}, "run": {"kind": "dimer", "dynamics": True}}
    p["fig8-desk"] = {"command": "variant", "model": {**_MODEL, "L": 610},
                      "scan": {"V": _vsamples(40)}, "run": {"kind": "dimer"}}
    return p


PRESETS = _build()

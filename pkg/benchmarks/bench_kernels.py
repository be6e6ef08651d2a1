"""Compare the numba and pure-numpy kernel paths.

Part 1 times each kernel pair directly (``*_nb`` vs ``*_np``) on inputs of
the size a real run produces.  Part 2 times an end-to-end wavepacket run and
one scan point in two subprocesses, one with ``NHFLOQUET_DISABLE_NUMBA=1``,
so the whole package takes the selected path.  The dense eigensolver is
timed alongside for scale: it dominates every spectral run regardless of
the kernel backend.

    python3 benchmarks/bench_kernels.py --L 987 --repeat 5
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from nhfloquet import kernels


def best_of(fn, repeat, number=1):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def bench_kernels(L, repeat):
    rng = np.random.default_rng(0)
    vecs = rng.standard_normal((L, L)) + 1j * rng.standard_normal((L, L))
    levels = np.sort(rng.standard_normal(L))
    psi = rng.standard_normal(L) + 1j * rng.standard_normal(L)
    pos = np.arange(1, L + 1, dtype=float) - L // 2
    c = rng.standard_normal(L) + 1j * rng.standard_normal(L)
    cases = {
        "ipr_columns": lambda f: f(vecs),
        "gap_ratios": lambda f: f(levels),
        "moments": lambda f: f(psi, pos),
        "lifted_moments": lambda f: f(psi, pos, 3.5, L),
        "circulant": lambda f: f(c),
    }
    rows = []
    for name, call in cases.items():
        nb = getattr(kernels, name + "_nb")
        np_ = getattr(kernels, name + "_np")
        call(nb)  # compile outside the timing
        number = 200 if name in ("moments", "lifted_moments", "gap_ratios") else 3
        t_nb = best_of(lambda: call(nb), repeat, number)
        t_np = best_of(lambda: call(np_), repeat, number)
        rows.append((name, t_np, t_nb))
    return rows


_END_TO_END = r"""
import json, math, time
from threadpoolctl import threadpool_limits
from nhfloquet import kernels
from nhfloquet.model import ModelParams
from nhfloquet.evolution import build_floquet_operator
from nhfloquet.dynamics import evolve_stroboscopic
from nhfloquet.scan import ScanSpec, run_point
from nhfloquet.spectral import eig_general
L, N = {L}, {N}
p = ModelParams(J=math.pi / 6, V=0.7 * math.pi, gamma=0.8, L=L)
with threadpool_limits(1):
    evolve_stroboscopic(build_floquet_operator(p.replace(L=21)), n_periods=2)  # warm-up/JIT
    t0 = time.perf_counter(); op = build_floquet_operator(p); t_build = time.perf_counter() - t0
    t0 = time.perf_counter(); evolve_stroboscopic(op, n_periods=N); t_dyn = time.perf_counter() - t0
    t0 = time.perf_counter(); eig_general(op.matrix); t_eig = time.perf_counter() - t0
    t0 = time.perf_counter(); run_point(ScanSpec(p, "V", (p.V,)), {{"V": p.V}}); t_pt = time.perf_counter() - t0
print(json.dumps(dict(backend=kernels.BACKEND, build=t_build, dynamics=t_dyn, eig=t_eig, point=t_pt)))
"""


def bench_end_to_end(L, n_periods):
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, NHFLOQUET_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", _END_TO_END.format(L=L, N=n_periods)],
                             env=env, capture_output=True, text=True, check=True)
        d = json.loads(res.stdout.strip().splitlines()[-1])
        out[d.pop("backend")] = d
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--L", type=int, default=987)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--periods", type=int, default=1000)
    args = ap.parse_args()

    print(f"kernels, L = {args.L} (best of {args.repeat})")
    print(f"{'kernel':16s} {'numpy [s]':>12s} {'numba [s]':>12s} {'speedup':>8s}")
    for name, t_np, t_nb in bench_kernels(args.L, args.repeat):
        print(f"{name:16s} {t_np:12.3e} {t_nb:12.3e} {t_np / t_nb:8.2f}")

    print(f"\nend to end, L = {args.L}, {args.periods} periods, one BLAS thread")
    res = bench_end_to_end(args.L, args.periods)
    print(f"{'stage':16s} {'numpy [s]':>12s} {'numba [s]':>12s}")
    for stage in ("build", "dynamics", "eig", "point"):
        print(f"{stage:16s} {res['numpy'][stage]:12.3f} {res['numba'][stage]:12.3f}")


if __name__ == "__main__":
    main()

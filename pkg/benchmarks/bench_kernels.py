"""Compare the compiled and numpy kernel backends.

Times each segmented kernel on a block of horizon rows over a dyadic layout,
checks that both backends agree, and finishes with an end-to-end criterion
sweep under each backend.

    python benchmarks/bench_kernels.py [--depth 12] [--rows 256] [--repeat 5]
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from growthlab import kernels
from growthlab.space import dyadic_space


def bench_kernels(depth: int, rows: int, repeat: int) -> None:
    backends = kernels.available_backends()
    sp = dyadic_space(depth)
    rng = np.random.default_rng(0)
    x = sp.to_sorted(rng.normal(0.0, 5.0, size=(rows, sp.n_atoms)))
    w, lw = sp.sorted_weights, sp.sorted_log_weights
    print(f"layout: {sp.n_atoms} atoms, {rows} rows; backends: {', '.join(backends)}")
    print(f"{'kernel':<22}{'cells':>7}" + "".join(f"{b + ' ms':>14}" for b in backends) + f"{'speedup':>10}")
    for t in (0, depth // 2, depth):
        off, mass, lmass = sp.offsets(t), sp.cell_mass(t), sp.log_cell_mass(t)
        cases = {
            "seg_mean": lambda impl: kernels.seg_mean(x, w, off, mass, impl=impl),
            "seg_entropic(-1)": lambda impl: kernels.seg_entropic(x, lw, off, lmass, -1.0, impl=impl),
            "seg_entropic(+1)": lambda impl: kernels.seg_entropic(x, lw, off, lmass, 1.0, impl=impl),
            "seg_min": lambda impl: kernels.seg_min(x, off, impl=impl),
        }
        for name, fn in cases.items():
            outs, times = {}, {}
            for b, impl in backends.items():
                outs[b] = fn(impl)
                times[b] = min(timeit.repeat(lambda: fn(impl), number=1, repeat=repeat)) * 1e3
            ref = outs["python"]
            for b, o in outs.items():
                if not np.allclose(o, ref, rtol=1e-12, atol=1e-12, equal_nan=True):
                    raise SystemExit(f"backend {b} disagrees on {name} at t={t}")
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{name:<22}{sp.n_cells(t):>7}" + "".join(f"{times[b]:>14.3f}" for b in backends)
                  + f"{speed:>9.1f}x")


def bench_end_to_end() -> None:
    code = ("import time; from growthlab.scenarios import scenario_dyadic; t=time.perf_counter(); "
            "r=scenario_dyadic(); print(f'{time.perf_counter()-t:.2f}', r.passed)")
    print("\nend to end: dyadic table (D=12, T_max=2000)")
    for label, env in (("compiled", {}), ("numpy", {"GROWTHLAB_PURE_PYTHON": "1"})):
        out = subprocess.run([sys.executable, "-c", code], env={**os.environ, **env},
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  {label:<9} {out[0]:>7} s  passed={out[1]}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=12)
    ap.add_argument("--rows", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()
    bench_kernels(args.depth, args.rows, args.repeat)
    if not args.skip_end_to_end:
        bench_end_to_end()


if __name__ == "__main__":
    main()

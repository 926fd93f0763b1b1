"""Compare the compiled jet kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Times the raw product and composition kernels on representative jet spaces
and one end-to-end curvature bundle evaluation, then checks both backends
agree to round-off.
"""
import argparse
import importlib
import os
import subprocess
import sys
import timeit

import numpy as np

from finslerkit import _kernels_py, jets

try:
    from finslerkit import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for nvars, order, batch in [(4, 5, 1), (4, 5, 64), (6, 4, 16), (6, 5, 64)]:
        sp = jets.space(nvars, order)
        a = rng.normal(size=(batch, sp.size))
        b = rng.normal(size=(batch, sp.size))
        d = a.copy()
        d[:, 0] = 0.0
        coef = rng.normal(size=(batch, order + 1))
        args = (sp.ia, sp.ib, sp.ik, sp.size)
        for name, fn, fargs in [("mul", "mul", (a, b) + args), ("compose", "compose", (d, coef) + args)]:
            t_py = min(timeit.repeat(lambda: getattr(_kernels_py, fn)(*fargs), number=1, repeat=repeat))
            if _kernels_c is not None:
                t_c = min(timeit.repeat(lambda: getattr(_kernels_c, fn)(*fargs), number=1, repeat=repeat))
                err = np.max(np.abs(getattr(_kernels_c, fn)(*fargs) - getattr(_kernels_py, fn)(*fargs)))
            else:
                t_c, err = float("nan"), float("nan")
            rows.append((f"{name} n={nvars} K={order} batch={batch} m={sp.size}", t_py, t_c, err))
    return rows


def bench_end_to_end():
    """Time one 64-point curvature bundle under each backend in a fresh interpreter."""
    code = (
        "import time, numpy as np; from finslerkit import finsler as fs, kernels;"
        "M = fs.catalog('randers-exp', 2); rng = np.random.default_rng(0);"
        "X = rng.uniform(-0.5, 0.5, (64, 2)); Y = rng.normal(size=(64, 2));"
        "fs.curvature_bundle(M, X[:2], Y[:2]); t = time.perf_counter();"
        "[fs.curvature_bundle(M, X, Y) for _ in range(3)];"
        "print(kernels.BACKEND, (time.perf_counter() - t) / 3)"
    )
    out = {}
    for pure in ("0", "1"):
        env = dict(os.environ, FINSLERKIT_PURE=pure)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        backend, secs = res.stdout.split()
        out[backend] = float(secs)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    importlib.import_module("finslerkit")
    print(f"{'kernel':42s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s} {'max diff':>10s}")
    for label, t_py, t_c, err in bench_kernels(args.repeat):
        print(f"{label:42s} {1e3 * t_py:11.3f} {1e3 * t_c:12.3f} {t_py / t_c:8.1f} {err:10.1e}")
    e2e = bench_end_to_end()
    print()
    for backend, secs in sorted(e2e.items()):
        print(f"curvature bundle, 64 points, {backend:6s} backend: {1e3 * secs:8.1f} ms")


if __name__ == "__main__":
    main()

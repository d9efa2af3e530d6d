"""Time the compiled interference-moment kernel against the NumPy fallback.

Usage: python3 benchmarks/bench_kernels.py [--rows N] [--nodes N] [--order N]

Also times one exact coverage evaluation under each backend.
"""
import argparse
import timeit

import numpy as np

from mmwave_ee import kernels
from mmwave_ee.coverage import coverage_homogeneous
from mmwave_ee.model import FadingModel, NetworkParams


def _best(fn, repeat=5):
    number = 1
    while timeit.timeit(fn, number=number) < 0.2:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=200)
    ap.add_argument("--nodes", type=int, default=400)
    ap.add_argument("--order", type=int, default=4)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    u = rng.lognormal(0.0, 3.0, size=(args.rows, args.nodes))
    w = rng.random((args.rows, args.nodes))
    ref = kernels.scaled_moments(u, w, 5, args.order, backend="python")
    print(f"kernel backend at import: {kernels.BACKEND}")
    t_py = _best(lambda: kernels.scaled_moments(u, w, 5, args.order, backend="python"))
    print(f"scaled_moments {args.rows}x{args.nodes} order {args.order}")
    print(f"  python    {t_py * 1e3:9.3f} ms")
    if kernels.BACKEND != "compiled":
        print("  compiled  not available")
        return
    out = kernels.scaled_moments(u, w, 5, args.order, backend="compiled")
    err = np.max(np.abs(out - ref) / np.maximum(np.abs(ref), 1e-300))
    t_c = _best(lambda: kernels.scaled_moments(u, w, 5, args.order, backend="compiled"))
    print(f"  compiled  {t_c * 1e3:9.3f} ms   speedup {t_py / t_c:5.1f}x   max rel diff {err:.1e}")

    params = NetworkParams(lambda_m=8e-4, fading=FadingModel(5))
    original = kernels.BACKEND
    for name in ("python", "compiled"):
        kernels.BACKEND = name
        t = _best(lambda: coverage_homogeneous(params, 10.0, 5.0), repeat=3)
        print(f"coverage_homogeneous (m=5) with {name:8s} kernel: {t * 1e3:8.2f} ms")
    kernels.BACKEND = original


if __name__ == "__main__":
    main()

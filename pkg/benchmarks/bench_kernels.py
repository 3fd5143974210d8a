"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--csv PATH]

Sizes follow the square-with-hole reference run: ~36k aperture points,
256 receive samples.
"""
import argparse
import sys
import timeit

import numpy as np

from nfdof import _kernels_py, kernels

try:
    from nfdof import _kernels as _compiled
except ImportError:
    _compiled = None


def cases(rng):
    M, K = 36_000, 256
    pts = np.column_stack([rng.uniform(-100, 100, M), np.zeros(M), rng.uniform(-100, 100, M)])
    u = np.array([0.0, 1.0, 0.0])
    r = 1.0 / np.linspace(1 / 200, 1 / 2000, K)
    q = r[:, None] * u
    rho2 = (pts**2).sum(axis=1)
    w = np.full(M, 0.25)
    lags = np.arange(-K + 1, K) * (1 / 200 - 1 / 2000) / (K - 1)
    g0 = np.abs(rng.standard_normal(4000))
    return {
        "fresnel_matrix": lambda impl: kernels.fresnel_matrix(pts, u, r, 1.0, impl=impl),
        "exact_matrix": lambda impl: kernels.exact_matrix(pts, q, 1.0, impl=impl),
        "kernel_lags": lambda impl: kernels.kernel_lags(rho2, w, lags, 1.0, impl=impl),
        "sinc_convolve": lambda impl: kernels.sinc_convolve(g0, 0.05, impl=impl),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--csv", default=None)
    args = ap.parse_args(argv)

    impls = {"python": _kernels_py}
    if _compiled is not None:
        impls["cython"] = _compiled
    else:
        print("compiled extension not built; timing the fallback only", file=sys.stderr)

    rows = []
    print(f"{'kernel':<16}" + "".join(f"{n:>12}" for n in impls) + f"{'speedup':>10}  threads={kernels.num_threads()}")
    for name, fn in cases(np.random.default_rng(0)).items():
        best = {n: min(timeit.repeat(lambda: fn(i), number=1, repeat=args.repeat)) for n, i in impls.items()}
        speed = best["python"] / best["cython"] if "cython" in best else float("nan")
        print(f"{name:<16}" + "".join(f"{t:>11.4f}s" for t in best.values()) + f"{speed:>9.2f}x")
        rows.append((name, best["python"], best.get("cython", float("nan")), speed))

    if args.csv:
        from nfdof.io import write_csv

        write_csv(args.csv, ["kernel", "python_s", "cython_s", "speedup"], rows, {"threads": kernels.num_threads()})


if __name__ == "__main__":
    main()

"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from quasifree import kernels


def cases(rng):
    x = np.linspace(-8, 8, 161)
    A, B = np.meshgrid(x, x, indexing="ij")
    a, b = A.ravel().copy(), B.ravel().copy()
    L = 4
    F = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    G = rng.normal(size=(L, L)) + 1j * rng.normal(size=(L, L))
    pts = rng.normal(size=(64, 4))
    sig = np.zeros((4, 4))
    sig[0, 2] = sig[1, 3] = 1
    sig -= sig.T
    m, cov = rng.normal(size=4), np.eye(4)
    return {
        "displacement_block (L=60)": lambda k: k.displacement_block(0.7 - 0.4j, 60),
        "weyl_trace_grid (161^2, L=4)": lambda k: k.weyl_trace_grid(F, a, b),
        "translate_trace_grid (161^2, L=4)": lambda k: k.translate_trace_grid(F, G, a, b),
        "gaussian_gram (64 points, d=4)": lambda k: k.gaussian_gram(pts, m, cov, sig),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    names = [b for b in ("python", "cython") if b in kernels.BACKENDS]
    print(f"{'kernel':36s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for label, fn in cases(rng).items():
        times = []
        for n in names:
            mod = kernels.get(n)
            fn(mod)
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)))
        row = f"{label:36s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()

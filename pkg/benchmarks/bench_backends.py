"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_backends.py [--n 2000] [--repeat 3]

Both backends consume the same random stream, so each kernel's outputs are
also compared for exact equality.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from mrim import _pykernels
from mrim.graph import generate_synthetic
from mrim.rrset import RRCollection
from mrim.spread import seed_csr

try:
    from mrim import _kernels
except ImportError:  # extension not built
    _kernels = None


def _cases(g, T: int):
    seeds = [tuple(range(t * 5, t * 5 + 5)) for t in range(T)]
    ptr, idx = seed_csr(seeds)
    counted = np.ones(g.n, dtype=np.uint8)
    roots = np.random.default_rng(0).integers(0, g.n, size=5000)
    coll = RRCollection(g.n, T)
    coll.generate(g, roots, np.random.default_rng(1))
    cptr, cdata, _ = coll.arrays()
    inv_ptr, inv_sets = coll.inverted()
    return {
        "mc_cumulative (r=2000)": lambda K, rng: K.mc_cumulative(
            g.out_ptr, g.out_idx, g.out_p, ptr, idx, counted, 2000, rng),
        "mc_marginal (r=2000)": lambda K, rng: K.mc_marginal(
            g.out_ptr, g.out_idx, g.out_p, ptr, idx, 7, 0, counted, 2000, rng),
        "rr_sets (5000 roots)": lambda K, rng: K.rr_sets(g.in_ptr, g.in_idx, g.in_p, roots, T, rng),
        "max_cover (T*k=50)": lambda K, rng: K.max_cover(
            cptr, cdata, inv_ptr, inv_sets, g.n * T, T, 10, False),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if a is None or b is None:
        return a is b
    return np.array_equal(a, b)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--T", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not available; nothing to compare")
        return 1
    g = generate_synthetic("power_law", args.n, scheme="wc", seed=0)
    print(f"graph: n={g.n} m={g.m}, T={args.T}")
    print(f"{'kernel':<26}{'python s':>12}{'cython s':>12}{'speedup':>10}  equal")
    for name, fn in _cases(g, args.T).items():
        times, outs = {}, {}
        for label, K in (("python", _pykernels), ("cython", _kernels)):
            best = float("inf")
            for _ in range(args.repeat):
                rng = np.random.default_rng(42)
                t0 = time.perf_counter()
                outs[label] = fn(K, rng)
                best = min(best, time.perf_counter() - t0)
            times[label] = best
        ratio = times["python"] / times["cython"] if times["cython"] > 0 else float("inf")
        print(f"{name:<26}{times['python']:>12.4f}{times['cython']:>12.4f}{ratio:>9.1f}x  "
              f"{_same(outs['python'], outs['cython'])}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

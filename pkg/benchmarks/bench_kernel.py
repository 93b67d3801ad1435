"""Time the compiled and pure-Python Smith kernels on the same workloads.

    python3 benchmarks/bench_kernel.py [--repeat 3]
"""

import argparse
import random
import time

from hnfil import kernel
from hnfil.htmod import hn_polygon_torsion, random_integral_module, truncate


def _workload(seed=7, count=40):
    rng = random.Random(seed)
    mods = []
    for _ in range(count):
        X = random_integral_module(rng, 2, rng.randint(2, 4), 3, max_val=3)
        mods.append(truncate(X, 2))
    return mods


def _matrices(seed=11, count=200, size=8, p=3, k=4, N=4):
    rng = random.Random(seed)
    q = p ** N
    out = []
    for _ in range(count):
        A = [[[rng.randrange(q) for _ in range(k)] for _ in range(size)] for _ in range(size)]
        V = [[rng.randrange(q) for _ in range(size)] for _ in range(size)]
        shifts = [rng.randrange(k * N) for _ in range(size)]
        out.append((A, V, shifts, p, k, N))
    return out


def _best(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _time(backend, mods, mats, repeat):
    kernel.set_backend(backend)
    hn = _best(lambda: [hn_polygon_torsion(T, bound=2 ** 10) for T in mods], repeat)
    raw = _best(lambda: [kernel.smith_image(*m) for m in mats], repeat)
    return hn, raw


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--count", type=int, default=40)
    args = ap.parse_args()
    mods = _workload(count=args.count)
    mats = _matrices()
    old = kernel.BACKEND
    backends = ["python"] + (["compiled"] if kernel._ckernel is not None else [])
    results = {}
    try:
        for b in backends:
            results[b] = _time(b, mods, mats, args.repeat)
    finally:
        kernel.set_backend(old)
    for label, idx, what in (("HN polygons", 0, f"{len(mods)} modules of order 2^6"), ("raw kernel", 1, f"{len(mats)} 8x8 matrices")):
        print(f"{label} ({what}):")
        for b, res in results.items():
            print(f"  {b:>9}: {res[idx][0]:.3f}s")
        if len(results) == 2:
            (tp, op), (tc, oc) = results["python"][idx], results["compiled"][idx]
            assert op == oc, "backends disagree"
            print(f"  speedup: {tp / tc:.1f}x")


if __name__ == "__main__":
    main()

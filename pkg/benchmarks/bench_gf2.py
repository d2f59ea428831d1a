"""Compare the compiled GF(2) elimination kernel with the pure-Python fallback.

    python3 benchmarks/bench_gf2.py [--sizes 64,256,512] [--repeat 3]

Reports rank/rref timings on random square matrices and one end-to-end
oracle convolution, for every available backend.
"""

import argparse
import time

import numpy as np

from sheafhofer import cellular, gf2
from sheafhofer.barcode import Bar, Barcode
from sheafhofer.rng import make_rng


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="64,256,512,1024")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    rng = make_rng(1, "bench")
    mats = {n: rng.integers(0, 2, (n, n), dtype=np.uint8) for n in sizes}
    F = Barcode([Bar(0, 2), Bar(1, 3, -1), Bar(0.5, 4)])
    cf = cellular.build_cellular(F, (0, 8))

    backends = gf2.available_backends()
    results = {}
    for name in backends:
        prev = gf2.set_backend(name)
        try:
            ranks = {n: gf2.rank(m) for n, m in mats.items()}
            row = {f"rank {n}": best_of(lambda m=m: gf2.rank(m), args.repeat) for n, m in mats.items()}
            row.update({f"rref {n}": best_of(lambda m=m: gf2.rref(m), args.repeat) for n, m in mats.items()})
            row["convolve 3x3 bars"] = best_of(lambda: cellular.oracle_convolve(cf, cf), 1)
            results[name] = (row, ranks)
        finally:
            gf2.set_backend(prev)

    ref = results[backends[0]][1]
    assert all(r[1] == ref for r in results.values()), "backends disagree"
    keys = list(results[backends[0]][0])
    print(f"{'case':<22}" + "".join(f"{b:>14}" for b in backends) + ("    speedup" if len(backends) > 1 else ""))
    for k in keys:
        vals = [results[b][0][k] for b in backends]
        line = f"{k:<22}" + "".join(f"{v * 1e3:>12.2f}ms" for v in vals)
        if len(vals) > 1:
            line += f"{vals[1] / vals[0]:>10.1f}x"
        print(line)


if __name__ == "__main__":
    main()

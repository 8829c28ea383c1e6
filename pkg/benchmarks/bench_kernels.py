"""Time the compiled and pure-Python kernels on the same batched inputs.

Run with ``python benchmarks/bench_kernels.py [--K 10] [--batch 256] [--repeat 20]``.
"""
import argparse
import timeit

import numpy as np

from nsprecoding import kernels
from nsprecoding.checks import random_grams


def _tridiag(G):
    K = G.shape[-1]
    D = np.zeros_like(G)
    idx = np.arange(K)
    D[:, idx, idx] = G[:, idx, idx]
    D[:, idx[1:], idx[:-1]] = G[:, idx[1:], idx[:-1]]
    D[:, idx[:-1], idx[1:]] = G[:, idx[:-1], idx[1:]]
    return D


def bench(K: int, batch: int, repeat: int):
    # the backends expect C-contiguous complex128 stacks, as the dispatcher provides
    G = np.ascontiguousarray(random_grams(K, batch, 0, cM=4 * K))
    D = np.ascontiguousarray(_tridiag(G))
    Dinv = np.ascontiguousarray(np.linalg.inv(D))
    cases = {
        "offdiag_energy": lambda m: m.offdiag_energy(G),
        "tridiag_inverse": lambda m: m.tridiag_inverse(D),
        "first_order_matrix": lambda m: m.first_order_matrix(G, Dinv),
        "precoder_stats": lambda m: m.precoder_stats(G, Dinv),
    }
    backends = kernels.available_backends()
    results = {}
    for name, fn in cases.items():
        for bname, mod in sorted(backends.items()):
            t = min(timeit.repeat(lambda: fn(mod), number=1, repeat=repeat))
            results[(name, bname)] = t
    return results, sorted(backends)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--K", type=int, default=10)
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args()
    results, names = bench(args.K, args.batch, args.repeat)
    print(f"K={args.K} batch={args.batch} best of {args.repeat}, microseconds per batch")
    print(f"{'kernel':<20}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) == 2 else ""))
    for kernel in dict.fromkeys(k for k, _ in results):
        ts = [results[(kernel, n)] for n in names]
        line = f"{kernel:<20}" + "".join(f"{t * 1e6:>12.1f}" for t in ts)
        if len(names) == 2:
            line += f"{ts[names.index('python')] / ts[names.index('cython')]:>11.2f}x"
        print(line)


if __name__ == "__main__":
    main()

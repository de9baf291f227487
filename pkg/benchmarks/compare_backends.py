#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against the pure-numpy fallback.

The two hot kernels are the one-sided Jacobi SVD (dominates singular value
projection runs) and the quartic tensor contractions (dominate the
sphere-constrained tensor component search). Run:

    python benchmarks/compare_backends.py

The script imports both backends directly, so it works regardless of which
one the package selected at import time.
"""

import time

import numpy as np

from ncvxkit import _kernels_py

try:
    from ncvxkit import _kernels as _kernels_compiled
except ImportError:
    _kernels_compiled = None


def timeit(fn, *args, repeats=5, min_time=0.2):
    best = float("inf")
    for _ in range(repeats):
        count = 0
        start = time.perf_counter()
        while time.perf_counter() - start < min_time / repeats:
            fn(*args)
            count += 1
        best = min(best, (time.perf_counter() - start) / count)
    return best


def bench_jacobi(backend, sizes=((20, 20), (30, 30), (64, 48))):
    rows = []
    for m, n in sizes:
        A = np.random.default_rng(0).standard_normal((m, n))
        rows.append(((m, n), timeit(backend.jacobi_svd, A)))
    return rows


def bench_quartic(backend, dims=(8, 16, 32)):
    rows = []
    for p in dims:
        rng = np.random.default_rng(1)
        Q, _ = np.linalg.qr(rng.standard_normal((p, 3)))
        T = np.einsum("ia,ja,ka,la->ijkl", Q, Q, Q, Q)
        v = rng.standard_normal(p)
        v /= np.linalg.norm(v)
        rows.append((p, timeit(backend.quartic_contract, T, v)))
    return rows


def main():
    backends = [("python", _kernels_py)]
    if _kernels_compiled is not None:
        backends.insert(0, ("compiled", _kernels_compiled))
    else:
        print("compiled extension not built; timing the fallback only\n")

    print(f"{'kernel':<28}" + "".join(f"{name:>14}" for name, _ in backends)
          + ("{:>10}".format("speedup") if len(backends) == 2 else ""))
    jac = {name: dict((k, v) for k, v in bench_jacobi(mod)) for name, mod in backends}
    for size in next(iter(jac.values())):
        cells = [jac[name][size] for name, _ in backends]
        line = f"jacobi_svd {size[0]}x{size[1]:<15}" + "".join(f"{c * 1e3:>12.3f}ms" for c in cells)
        if len(cells) == 2:
            line += f"{cells[1] / cells[0]:>9.1f}x"
        print(line)
    qua = {name: dict(bench_quartic(mod)) for name, mod in backends}
    for p in next(iter(qua.values())):
        cells = [qua[name][p] for name, _ in backends]
        line = f"quartic_contract p={p:<8}" + "".join(f"{c * 1e6:>12.1f}us" for c in cells)
        if len(cells) == 2:
            line += f"{cells[1] / cells[0]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()

"""Benchmark: numba kernels vs the pure-numpy fallback.

Times the three hot paths (single-string apply, weighted-sum matvec, full
correlation-matrix build) on a disordered chain and prints a table.

    python benchmarks/bench_kernels.py [--n 12] [--repeat 20]
"""

import argparse
import time

import numpy as np

from corrspec import kernels
from corrspec.basis import LatticeSpec, build_local_basis
from corrspec.correlation import build_pure
from corrspec.hamiltonians import random_disordered
from corrspec.spectra import ground_state


def timeit(fn, repeat):
    fn()  # warm-up (JIT compilation on the numba path)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=12)
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    spec = LatticeSpec(n=args.n)
    basis = build_local_basis(spec)
    ham = random_disordered(basis, seed=0)
    rng = np.random.default_rng(1)
    v = rng.normal(size=spec.N) + 1j * rng.normal(size=spec.N)
    v /= np.linalg.norm(v)
    op = basis.ops[len(basis.ops) // 2]
    xflip, smask, pref = op._masks

    rows = []
    backends = ["numpy"] + (["numba"] if kernels.HAS_NUMBA else [])
    results = {}
    for backend in backends:
        kernels.set_backend(backend)
        t_single = timeit(lambda: kernels.apply_pauli(v, xflip, smask, pref), args.repeat)
        t_matvec = timeit(lambda: ham.apply(v), args.repeat)
        t_corr = timeit(lambda: build_pure(v, basis), max(1, args.repeat // 5))
        results[backend] = (t_single, t_matvec, t_corr)
        rows.append((backend, t_single, t_matvec, t_corr))

    print(f"n={args.n}  N={spec.N}  S={basis.S}  (best of {args.repeat})")
    print(f"{'backend':<8} {'apply_pauli':>14} {'H @ psi':>14} {'corr matrix':>14}")
    for backend, t1, t2, t3 in rows:
        print(f"{backend:<8} {t1 * 1e6:>11.1f} us {t2 * 1e3:>11.2f} ms {t3 * 1e3:>11.1f} ms")
    if len(rows) == 2:
        s = [results["numpy"][i] / results["numba"][i] for i in range(3)]
        print(f"{'speedup':<8} {s[0]:>13.1f}x {s[1]:>13.1f}x {s[2]:>13.1f}x")

    # cross-backend agreement on the full pipeline
    if kernels.HAS_NUMBA:
        kernels.set_backend("numba")
        m1 = build_pure(v, basis).entries
        kernels.set_backend("numpy")
        m2 = build_pure(v, basis).entries
        print(f"backend agreement |dM|max = {np.abs(m1 - m2).max():.3e}")


if __name__ == "__main__":
    main()

"""Compiled vs numpy kernel timings.

    python benchmarks/bench_kernels.py [--repeat 5]

Times the three kernels on their own and a full sparse run, once per
available backend, and prints the speedup of each backend over ``python``.
"""

import argparse
import timeit

import numpy as np

from memwalk import evolution, kernels
from memwalk.evolution import Q, SparseState
from memwalk.lattice import LatticeConfig, WalkProgram


def random_rows(rng, n_sites, n_rows):
    nw = (n_sites + 63) // 64
    mask = rng.integers(0, 2**63, (n_rows, nw), dtype=np.uint64)
    bits = rng.integers(0, 2**63, (n_rows, nw), dtype=np.uint64) & mask
    pos = rng.integers(0, n_sites, n_rows).astype(np.int64)
    vel = rng.integers(0, 2, n_rows).astype(np.uint8)
    amp = rng.normal(size=n_rows) + 1j * rng.normal(size=n_rows)
    return pos, vel, mask, bits, amp


def cases(rng):
    n = 2001
    a = rng.uniform(0, 1, n)
    b = np.sqrt(1 - a**2)
    pos, vel, mask, bits, amp = random_rows(rng, n, 20000)
    table = Q.as_array()
    lat = LatticeConfig(2001)
    program = WalkProgram.from_b(lat, rng.uniform(0, 1, 1000))
    start = SparseState.initial(program)
    # realistic overlap rows: the branches of an evolved state
    evolved = start
    for _ in range(300):
        evolved = evolution.step(evolved)
    ma, va = evolved.mask, evolved.bits
    spec = evolved.memory

    def run_sparse(k):
        state = start
        for _ in range(300):
            state = evolution.step(state, backend=k)
        return evolution.position_distribution(state, backend=k)

    return {
        "expand_coin (20k branches, N=2001)": lambda k: k.expand_coin(pos, vel, mask, bits, amp, a, b, table, n),
        "overlap_matrix (301x301, N=2001)": lambda k: k.overlap_matrix(ma, va, ma, va, spec.a, spec.b, n),
        "coin_permutation (N=13)": lambda k: k.coin_permutation(13, table),
        "sparse run (300 steps, N=2001)": run_sparse,
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(7)
    names = sorted(kernels.available(), key=lambda n: n != "python")
    if len(names) < 2:
        print("compiled extension not built; only the python backend is available")
    print(f"{'kernel':<38}" + "".join(f"{n:>12}" for n in names) + "     speedup")
    for label, fn in cases(rng).items():
        best = {}
        for name in names:
            k = kernels.get(name)
            fn(k)  # warm up
            best[name] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        cols = "".join(f"{best[n] * 1e3:>10.2f}ms" for n in names)
        speed = "".join(f"  {n} x{best['python'] / best[n]:.1f}" for n in names if n != "python")
        print(f"{label:<38}{cols}{speed}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main() or 0)

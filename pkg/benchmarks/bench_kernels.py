"""Compare the numba and numpy kernel backends on the structural-property scans.

    python benchmarks/bench_kernels.py --n 12 --q 4 --repeat 5

Both backends run on the same relation table; their outputs are checked for
equality before any timing is reported. Numba compile time is excluded by a
warm-up call.
"""
import argparse
import random
import statistics
import time

import numpy as np

from distpref import kernels
from distpref.core import GroundSet
from distpref.frontier import RelationTable
from distpref.preferences import Bounds, random_type_assignment, soft_bounds_preference

SCANS = ("upper_bound_scan", "maximizer_scan", "improvement_scan")


def build_table(n, q, seed):
    rng = random.Random(seed)
    tau = random_type_assignment(n, 3, rng)
    bounds = Bounds((1, 0, 0), (q, q - 1, q))
    pref = soft_bounds_preference(tau, bounds, q)
    return RelationTable.build(pref, GroundSet(n), q, max_subsets=None)


def args_for(name, t, limit):
    if name == "upper_bound_scan":
        return (t.masks, t.geq, limit)
    return (t.masks, t.geq, t.lookup, limit)


def same(a, b):
    return all(np.array_equal(np.asarray(x), np.asarray(y)) for x, y in zip(a, b))


def timed(fn, args, repeat):
    fn(*args)
    runs = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        runs.append(time.perf_counter() - t0)
    return statistics.median(runs)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--q", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--limit", type=int, default=100)
    a = ap.parse_args(argv)

    t = build_table(a.n, a.q, a.seed)
    print(f"n={a.n} q={a.q} sets={len(t.masks)} repeat={a.repeat}")
    print(f"{'kernel':<18}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name in SCANS:
        nb = kernels.BACKENDS["numba"][name]
        npf = kernels.BACKENDS["numpy"][name]
        args = args_for(name, t, a.limit)
        if not same(nb(*args), npf(*args)):
            raise SystemExit(f"{name}: backends disagree")
        t_nb = timed(nb, args, a.repeat)
        t_np = timed(npf, args, a.repeat)
        print(f"{name:<18}{t_nb * 1e3:>12.2f}{t_np * 1e3:>12.2f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()

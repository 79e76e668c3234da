"""Random instances of the preference families used across the tests."""
import math
import random
from fractions import Fraction

from distpref.matroid import PartitionMatroid, TransversalMatroid, VectorMatroid
from distpref.preferences import (
    Bounds,
    DiversityIndex,
    additive_preference,
    diversity_preference,
    matroid_rank_preference,
    pointwise_preference,
    random_type_assignment,
    soft_bounds_preference,
)

CERTIFIED = ("additive", "pointwise", "partition", "transversal", "vector", "soft", "log-diversity")


def random_bounds(k, q, rng):
    floors, ceilings = [], []
    for _ in range(k):
        r = rng.randint(0, max(0, q - 1))
        floors.append(r)
        ceilings.append(rng.randint(r, q))
    return Bounds(tuple(floors), tuple(ceilings))


def make(family, n, q, rng: random.Random):
    """One random preference of ``family`` on ``n`` students."""
    if family == "additive":
        return additive_preference([rng.randint(0, 3) for _ in range(n)])
    if family == "additive-rational":
        return additive_preference([Fraction(rng.randint(0, 6), rng.randint(1, 3)) for _ in range(n)])
    if family == "pointwise":
        return pointwise_preference([rng.randint(0, 3) for _ in range(n)])
    if family == "partition":
        k = rng.randint(1, 3)
        tau = random_type_assignment(n, k, rng)
        return matroid_rank_preference(PartitionMatroid(tau.tau, [rng.randint(0, 2) for _ in range(k)]))
    if family == "transversal":
        slots = [sum(1 << s for s in range(n) if rng.random() < 0.4) for _ in range(rng.randint(1, 3))]
        return matroid_rank_preference(TransversalMatroid(n, slots))
    if family == "vector":
        d = rng.randint(1, 3)
        return matroid_rank_preference(VectorMatroid([[rng.randint(0, 1) for _ in range(d)] for _ in range(n)]))
    if family == "soft":
        k = rng.randint(1, 3)
        tau = random_type_assignment(n, k, rng)
        return soft_bounds_preference(tau, random_bounds(k, q, rng), q)
    if family == "log-diversity":
        k = rng.randint(1, 3)
        tau = random_type_assignment(n, k, rng)
        return diversity_preference(tau, DiversityIndex.log(q))
    if family == "weighted-log-diversity":
        k = rng.randint(1, 3)
        tau = random_type_assignment(n, k, rng)
        w = [rng.randint(1, 3) for _ in range(k)]
        return diversity_preference(
            tau, DiversityIndex(lambda xi: sum(c * math.log1p(x) for c, x in zip(w, xi)), q, "wlog"))
    raise KeyError(family)

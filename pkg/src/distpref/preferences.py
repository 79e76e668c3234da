"""Concrete distributional-preference families.

Additive and pointwise (value-function based), matroid rank, dichotomous and
soft floors/ceilings, and diversity indices over type-count vectors.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .core import (
    FLOAT_TOL,
    CheckReport,
    Comparison,
    DistributionalPreference,
    GroundSet,
    compare_values,
    is_exact,
    members,
)
from .frontier import frontier

_INT_SAFE = 2**62


def _bit_matrix(masks: np.ndarray, n: int) -> np.ndarray:
    return (np.asarray(masks, dtype=np.int64)[:, None] >> np.arange(n, dtype=np.int64)) & 1


def _exact_vector(values):
    """Scale rational values to a common integer grid when that is safe.

    Returns ``(array, tol)``: an int64 array with tolerance 0 for exact
    inputs, otherwise a float64 array with :data:`FLOAT_TOL`.
    """
    if all(is_exact(v) for v in values):
        fr = [Fraction(v) for v in values]
        lcm = reduce(lambda a, b: a * b // math.gcd(a, b), (f.denominator for f in fr), 1)
        ints = [int(f * lcm) for f in fr]
        if sum(abs(x) for x in ints) < _INT_SAFE:
            return np.array(ints, dtype=np.int64), 0
    return np.array([float(v) for v in values], dtype=np.float64), FLOAT_TOL


# --------------------------------------------------------------------------
# value functions


class AdditivePreference(DistributionalPreference):
    """Compare sets by the total value of their members."""

    is_complete = True

    def __init__(self, values: Sequence):
        self.values = tuple(values)
        self._vec, self._tol = _exact_vector(self.values)

    def total(self, mask):
        return sum((self.values[i] for i in members(mask)), 0)

    def _compare(self, a, b):
        return compare_values(self.total(a), self.total(b))

    def scores(self, masks):
        return _bit_matrix(masks, len(self.values)) @ self._vec, self._tol


class PointwisePreference(DistributionalPreference):
    """Rank-wise domination of the descending value profiles.

    Two equal-size sets are incomparable when each wins at some rank.
    """

    equal_size_only = True

    def __init__(self, values: Sequence):
        self.values = tuple(values)
        self._vec, self._tol = _exact_vector(self.values)

    def _profile(self, mask):
        return sorted((self.values[i] for i in members(mask)), reverse=True)

    def _compare(self, a, b):
        pa, pb = self._profile(a), self._profile(b)
        ab = all(compare_values(x, y).weakly_better for x, y in zip(pa, pb))
        ba = all(compare_values(y, x).weakly_better for x, y in zip(pa, pb))
        return Comparison.from_relation(ab, ba)

    def relation(self, masks):
        masks = np.asarray(masks, dtype=np.int64)
        bits = _bit_matrix(masks, len(self.values)).astype(bool)
        sizes = bits.sum(axis=1)
        if len(masks) == 0 or np.any(sizes != sizes[0]):
            return super().relation(masks)
        k = int(sizes[0])
        floor = np.iinfo(np.int64).min if self._tol == 0 else -np.inf
        # descending value profile of each set
        prof = np.sort(np.where(bits, self._vec[None, :], floor), axis=1)[:, ::-1][:, :k]
        return np.all(prof[:, None, :] >= prof[None, :, :] - self._tol, axis=2)


def additive_preference(values: Sequence) -> AdditivePreference:
    return AdditivePreference(values)


def pointwise_preference(values: Sequence) -> PointwisePreference:
    return PointwisePreference(values)


def indifferent_preference(n: int) -> AdditivePreference:
    """Every pair of sets is indifferent."""
    return AdditivePreference([0] * n)


def same_frontier_check(ground: GroundSet, values: Sequence, q: int, *, samples=2000, seed=0) -> CheckReport:
    """Compare the additive and pointwise frontiers menu by menu.

    Exhaustive over all menus when ``ground.n <= 12``; otherwise ``samples``
    random menus.
    """
    add = AdditivePreference(values)
    pw = PointwisePreference(values)
    if ground.n <= 12:
        menus = range(1 << ground.n)
    else:
        rng = random.Random(seed)
        menus = (rng.getrandbits(ground.n) for _ in range(samples))
    rep = CheckReport("same-frontier")
    for S in menus:
        rep.checked += 1
        fa = set(frontier(add, S, q).members)
        fp = set(frontier(pw, S, q).members)
        if fa != fp:
            rep.violations.append({"menu": S, "additive": sorted(fa), "pointwise": sorted(fp)})
    rep.premises = rep.checked
    rep.total_violations = len(rep.violations)
    return rep


# --------------------------------------------------------------------------
# types and bounds


@dataclass(frozen=True)
class TypeAssignment:
    """One type index per student; ``k`` types in total."""

    tau: tuple[int, ...]
    k: int
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tau", tuple(int(t) for t in self.tau))
        if any(not 0 <= t < self.k for t in self.tau):
            raise ValueError("type index out of range")
        if self.names is not None and len(self.names) != self.k:
            raise ValueError("one name per type is required")

    @property
    def type_masks(self) -> np.ndarray:
        out = np.zeros(self.k, dtype=np.int64)
        for s, t in enumerate(self.tau):
            out[t] |= np.int64(1) << s
        return out

    def counts(self, mask) -> tuple[int, ...]:
        c = [0] * self.k
        for s in members(mask):
            c[self.tau[s]] += 1
        return tuple(c)

    def count_matrix(self, masks) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64)
        tm = self.type_masks
        inter = (masks[:, None] & tm[None, :]).ravel()
        return kernels.popcount(inter).reshape(len(masks), self.k)


@dataclass(frozen=True)
class Bounds:
    """Per-type floors and ceilings."""

    floors: tuple[int, ...]
    ceilings: tuple[int, ...]

    def __post_init__(self):
        if len(self.floors) != len(self.ceilings):
            raise ValueError("floors and ceilings must have the same length")
        for t, (r, p) in enumerate(zip(self.floors, self.ceilings)):
            if r < 0 or p < 0:
                raise ValueError("bounds must be non-negative")
            if r > p:
                raise ValueError(f"type {t}: floor {r} exceeds ceiling {p} (need r_t <= p_t)")


def satisfies_bounds(mask, tau: TypeAssignment, bounds: Bounds) -> bool:
    return all(r <= c <= p for c, r, p in zip(tau.counts(mask), bounds.floors, bounds.ceilings))


class DichotomousBoundsPreference(DistributionalPreference):
    """Desirable sets (within all bounds) above undesirable ones; indifferent
    within each class."""

    is_complete = True

    def __init__(self, tau: TypeAssignment, bounds: Bounds):
        self.tau = tau
        self.bounds = bounds

    def _compare(self, a, b):
        return compare_values(int(satisfies_bounds(a, self.tau, self.bounds)),
                              int(satisfies_bounds(b, self.tau, self.bounds)))

    def scores(self, masks):
        c = self.tau.count_matrix(masks)
        lo = np.array(self.bounds.floors)
        hi = np.array(self.bounds.ceilings)
        return np.all((c >= lo) & (c <= hi), axis=1).astype(np.int64), 0


class SoftBoundsPreference(DistributionalPreference):
    """Sum of per-type penalties: ``penalty`` per missing floor unit, 1 per
    unit above a ceiling."""

    is_complete = True

    def __init__(self, tau: TypeAssignment, bounds: Bounds, q: int, penalty: int | None = None):
        self.tau = tau
        self.bounds = bounds
        self.q = q
        # q + 1 outweighs the largest possible ceiling penalty of a size-q set
        self.penalty = q + 1 if penalty is None else penalty

    def error(self, mask) -> int:
        total = 0
        for c, r, p in zip(self.tau.counts(mask), self.bounds.floors, self.bounds.ceilings):
            if c < r:
                total -= self.penalty * (r - c)
            elif c > p:
                total -= c - p
        return total

    def _compare(self, a, b):
        return compare_values(self.error(a), self.error(b))

    def scores(self, masks):
        c = self.tau.count_matrix(masks)
        lo = np.array(self.bounds.floors, dtype=np.int64)
        hi = np.array(self.bounds.ceilings, dtype=np.int64)
        err = -self.penalty * np.maximum(lo - c, 0) - np.maximum(c - hi, 0)
        return err.sum(axis=1).astype(np.int64), 0


def dichotomous_bounds_preference(tau, bounds) -> DichotomousBoundsPreference:
    return DichotomousBoundsPreference(tau, bounds)


def soft_bounds_preference(tau, bounds, q, penalty=None) -> SoftBoundsPreference:
    return SoftBoundsPreference(tau, bounds, q, penalty)


# --------------------------------------------------------------------------
# matroid rank


class MatroidRankPreference(DistributionalPreference):
    """Equal-size sets ordered by matroid rank."""

    is_complete = True
    equal_size_only = True

    def __init__(self, matroid):
        self.matroid = matroid

    def _compare(self, a, b):
        return compare_values(self.matroid.rank(a), self.matroid.rank(b))

    def scores(self, masks):
        return np.array([self.matroid.rank(int(x)) for x in masks], dtype=np.int64), 0


def matroid_rank_preference(matroid) -> MatroidRankPreference:
    return MatroidRankPreference(matroid)


# --------------------------------------------------------------------------
# diversity indices


class DiversityIndex:
    """A real-valued index on type-count vectors, calibrated for capacity q."""

    def __init__(self, fn: Callable[[tuple[int, ...]], float], q: int, name: str = "custom"):
        self.fn = fn
        self.q = q
        self.name = name
        self._memo: dict = {}

    def __call__(self, counts) -> float:
        counts = tuple(int(c) for c in counts)
        try:
            return self._memo[counts]
        except KeyError:
            v = self._memo[counts] = self.fn(counts)
            return v

    @classmethod
    def log(cls, q: int) -> "DiversityIndex":
        """``sum(log(1 + x_i))``: diminishing returns to each type."""
        return cls(lambda xi: sum(math.log1p(x) for x in xi), q, "log")

    @classmethod
    def linear(cls, coefs: Sequence, q: int) -> "DiversityIndex":
        coefs = tuple(coefs)
        return cls(lambda xi: sum((c * x for c, x in zip(coefs, xi)), 0), q, "linear")

    @classmethod
    def table(cls, values: dict, q: int) -> "DiversityIndex":
        values = {tuple(k): v for k, v in values.items()}

        def fn(xi):
            try:
                return values[xi]
            except KeyError:
                raise KeyError(f"diversity table has no entry for counts {xi}") from None

        return cls(fn, q, "table")


class DiversityPreference(DistributionalPreference):
    """Equal-size sets ordered by a diversity index of their type counts."""

    is_complete = True
    equal_size_only = True

    def __init__(self, tau: TypeAssignment, index: DiversityIndex):
        self.tau = tau
        self.index = index

    def _compare(self, a, b):
        return compare_values(self.index(self.tau.counts(a)), self.index(self.tau.counts(b)))

    def scores(self, masks):
        counts = self.tau.count_matrix(masks)
        vals = [self.index(row) for row in counts.tolist()]
        arr, tol = _exact_vector(vals)
        return arr, tol


def diversity_preference(tau, index) -> DiversityPreference:
    return DiversityPreference(tau, index)


def count_vectors(k: int, q: int):
    """All ``xi`` in Z_+^k with ``sum(xi) == q``, lexicographically descending."""
    if k == 1:
        yield (q,)
        return
    for first in range(q, -1, -1):
        for rest in count_vectors(k - 1, q - first):
            yield (first,) + rest


def check_q_ordinal_concavity(index, k: int, q: int) -> CheckReport:
    """Brute-force the q-ordinal concavity definition over the count domain.

    A violation is a triple ``(xi, xi_tilde, i)`` for which no admissible
    ``j`` satisfies any of the three clauses.
    """
    dom = list(count_vectors(k, q))
    rep = CheckReport("q-ordinal-concavity")

    def cmp(u, v):
        return compare_values(index(u), index(v))

    for xi in dom:
        for xt in dom:
            for i in range(k):
                if xi[i] <= xt[i]:
                    continue
                rep.premises += 1
                ok = False
                for j in range(k):
                    if xi[j] >= xt[j]:
                        continue
                    moved = list(xi)
                    moved[i] -= 1
                    moved[j] += 1
                    back = list(xt)
                    back[i] += 1
                    back[j] -= 1
                    c1 = cmp(tuple(moved), xi)
                    c2 = cmp(tuple(back), xt)
                    if (c1 is Comparison.BETTER or c2 is Comparison.BETTER
                            or (c1 is Comparison.INDIFFERENT and c2 is Comparison.INDIFFERENT)):
                        ok = True
                        break
                if not ok:
                    rep.violations.append({"xi": xi, "xi_tilde": xt, "i": i})
    rep.checked = len(dom) ** 2
    rep.total_violations = len(rep.violations)
    return rep


def random_type_assignment(n: int, k: int, rng: random.Random) -> TypeAssignment:
    return TypeAssignment(tuple(rng.randrange(k) for _ in range(n)), k)


__all__ = [
    "AdditivePreference",
    "Bounds",
    "DichotomousBoundsPreference",
    "DiversityIndex",
    "DiversityPreference",
    "MatroidRankPreference",
    "PointwisePreference",
    "SoftBoundsPreference",
    "TypeAssignment",
    "additive_preference",
    "check_q_ordinal_concavity",
    "count_vectors",
    "dichotomous_bounds_preference",
    "diversity_preference",
    "indifferent_preference",
    "matroid_rank_preference",
    "pointwise_preference",
    "same_frontier_check",
    "satisfies_bounds",
    "soft_bounds_preference",
]

"""Matroid independence oracles, the greedy basis, and base-axiom checks.

Three constructions are provided: partition (per-type caps), transversal
(students matched into eligibility slots) and vector (linear independence of
0/1 attribute vectors over the rationals).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .core import CheckReport, PriorityRanking, members, popcount, subsets_of_size, swap, to_mask


class MatroidOracle:
    """Independence oracle over a ground set of ``n`` students.

    ``rank`` is the greedy scan: add members one at a time and keep those
    that preserve independence. Subclasses implement ``is_independent``.
    """

    def __init__(self, n: int):
        self.n = n
        self._rank_memo: dict[int, int] = {}

    def is_independent(self, mask: int) -> bool:
        raise NotImplementedError

    def rank(self, mask: int) -> int:
        r = self._rank_memo.get(mask)
        if r is None:
            kept = 0
            for s in members(mask):
                if self.is_independent(kept | 1 << s):
                    kept |= 1 << s
            r = self._rank_memo[mask] = popcount(kept)
        return r

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def bases(self) -> list[int]:
        """Maximum-rank subsets of the ground set (exhaustive; small n only)."""
        r = self.rank(self.full)
        return [b for b in subsets_of_size(self.full, r) if self.is_independent(b)]


class UniformMatroid(MatroidOracle):
    def __init__(self, n: int, r: int):
        super().__init__(n)
        self.r = r

    def is_independent(self, mask):
        return popcount(mask) <= self.r


class PartitionMatroid(MatroidOracle):
    """At most ``capacities[t]`` students of each type ``t``."""

    def __init__(self, tau: Sequence[int], capacities: Sequence[int]):
        super().__init__(len(tau))
        self.tau = tuple(tau)
        self.capacities = tuple(capacities)
        if any(k < 0 for k in self.capacities):
            raise ValueError("capacities must be non-negative")
        self._type_masks = [to_mask(s for s, t in enumerate(self.tau) if t == i)
                            for i in range(len(self.capacities))]

    def is_independent(self, mask):
        return all(popcount(mask & tm) <= k for tm, k in zip(self._type_masks, self.capacities))

    def closed_form_rank(self, mask) -> int:
        return sum(min(k, popcount(mask & tm)) for tm, k in zip(self._type_masks, self.capacities))


class TransversalMatroid(MatroidOracle):
    """A set is independent when its members can be placed injectively into
    slots they are eligible for."""

    def __init__(self, n: int, slots: Iterable[int]):
        super().__init__(n)
        self.slots = tuple(int(k) for k in slots)
        self._memo: dict[int, bool] = {}

    def matching_size(self, mask: int) -> int:
        """Maximum bipartite matching between ``mask`` and the slots
        (augmenting paths)."""
        slot_of: dict[int, int] = {}  # slot -> student
        size = 0
        for s in members(mask):
            if self._augment(s, slot_of, set()):
                size += 1
        return size

    def _augment(self, s, slot_of, seen):
        for i, elig in enumerate(self.slots):
            if not elig >> s & 1 or i in seen:
                continue
            seen.add(i)
            other = slot_of.get(i)
            if other is None or self._augment(other, slot_of, seen):
                slot_of[i] = s
                return True
        return False

    def is_independent(self, mask):
        ok = self._memo.get(mask)
        if ok is None:
            ok = self._memo[mask] = self.matching_size(mask) == popcount(mask)
        return ok


def elimination_rank(vectors: Sequence[Sequence]) -> int:
    """Rank over the rationals by fraction-exact Gaussian elimination."""
    rows = [[Fraction(x) for x in v] for v in vectors]
    if not rows:
        return 0
    width = len(rows[0])
    rank = 0
    for col in range(width):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / p[col]
                rows[r] = [a - f * b for a, b in zip(rows[r], p)]
        rank += 1
        if rank == len(rows):
            break
    return rank


class VectorMatroid(MatroidOracle):
    """Linear independence of per-student 0/1 attribute vectors."""

    def __init__(self, vectors: Sequence[Sequence[int]]):
        super().__init__(len(vectors))
        self.vectors = tuple(tuple(int(x) for x in v) for v in vectors)
        if len({len(v) for v in self.vectors}) > 1:
            raise ValueError("attribute vectors must share one length")
        self._memo: dict[int, bool] = {}

    def elimination_rank(self, mask) -> int:
        return elimination_rank([self.vectors[s] for s in members(mask)])

    def is_independent(self, mask):
        ok = self._memo.get(mask)
        if ok is None:
            ok = self._memo[mask] = self.elimination_rank(mask) == popcount(mask)
        return ok


class FrontierMatroid(MatroidOracle):
    """Independent sets of the matroid whose bases are the ``k``-subsets of
    ``pool`` with the largest attainable rank under ``base``.

    ``I`` is independent iff ``|I| <= min(r(I), rho) + (k - rho)`` with
    ``rho = min(k, r(pool))``: a rank-``rho`` truncation of ``base`` plus
    ``k - rho`` free seats.
    """

    def __init__(self, base: MatroidOracle, pool: int, k: int):
        super().__init__(base.n)
        self.base = base
        self.pool = pool
        self.k = k
        self.rho = min(k, base.rank(pool))

    def is_independent(self, mask):
        if mask & ~self.pool:
            return False
        return popcount(mask) <= min(self.base.rank(mask), self.rho) + self.k - self.rho


def partition_matroid(tau, capacities) -> PartitionMatroid:
    return PartitionMatroid(tau, capacities)


def transversal_matroid(n, slots) -> TransversalMatroid:
    return TransversalMatroid(n, slots)


def vector_matroid(vectors) -> VectorMatroid:
    return VectorMatroid(vectors)


def rank(oracle: MatroidOracle, mask: int) -> int:
    return oracle.rank(mask)


def greedy_basis(oracle: MatroidOracle, pool: int, pi: PriorityRanking) -> int:
    """Scan ``pool`` in priority order, keeping each student whose addition
    preserves independence."""
    kept = 0
    for s in pi.sorted_members(pool):
        if oracle.is_independent(kept | 1 << s):
            kept |= 1 << s
    return kept


def check_base_axioms(bases: Iterable[int]) -> CheckReport:
    """Verify non-emptiness, equal cardinality, the exchange axiom and the
    strong (symmetric) exchange property on an explicit family."""
    fam = sorted(set(int(b) for b in bases))
    fset = set(fam)
    rep = CheckReport("base-axioms")
    if not fam:
        rep.violations.append({"axiom": "B1"})
        rep.total_violations = 1
        return rep
    sizes = {popcount(b) for b in fam}
    if len(sizes) > 1:
        rep.violations.append({"axiom": "equal-cardinality", "sizes": sorted(sizes)})
    for a in fam:
        for b in fam:
            if a == b:
                continue
            for s in members(a & ~b):
                rep.premises += 1
                outs = members(b & ~a)
                if not any(swap(a, s, t) in fset for t in outs):
                    rep.violations.append({"axiom": "B2", "S": a, "S2": b, "s": s})
                if not any(swap(a, s, t) in fset and swap(b, t, s) in fset for t in outs):
                    rep.violations.append({"axiom": "strong-exchange", "S": a, "S2": b, "s": s})
    rep.checked = len(fam)
    rep.total_violations = len(rep.violations)
    return rep


def check_independence_axioms(oracle: MatroidOracle) -> CheckReport:
    """Exhaustively test the empty set, downward closure and augmentation."""
    n = oracle.n
    indep = [oracle.is_independent(m) for m in range(1 << n)]
    rep = CheckReport("independence-axioms", checked=1 << n)
    if not indep[0]:
        rep.violations.append({"axiom": "empty"})
    for a in range(1 << n):
        if not indep[a]:
            continue
        for s in members(a):
            if not indep[a & ~(1 << s)]:
                rep.violations.append({"axiom": "downward-closure", "set": a, "drop": s})
        for b in range(1 << n):
            if indep[b] and popcount(a) < popcount(b):
                rep.premises += 1
                if not any(indep[a | 1 << x] for x in members(b & ~a)):
                    rep.violations.append({"axiom": "augmentation", "A": a, "B": b})
    rep.total_violations = len(rep.violations)
    return rep


def check_rank_axioms(oracle: MatroidOracle) -> CheckReport:
    """Cardinality bound, monotonicity and submodularity, exhaustively."""
    n = oracle.n
    r = [oracle.rank(m) for m in range(1 << n)]
    rep = CheckReport("rank-axioms", checked=1 << n)
    for a in range(1 << n):
        if not 0 <= r[a] <= popcount(a):
            rep.violations.append({"axiom": "R1", "set": a})
        for s in range(n):
            if r[a] > r[a | 1 << s]:
                rep.violations.append({"axiom": "R2", "set": a, "add": s})
        for b in range(a + 1, 1 << n):
            rep.premises += 1
            if r[a | b] + r[a & b] > r[a] + r[b]:
                rep.violations.append({"axiom": "R3", "A": a, "B": b})
    rep.total_violations = len(rep.violations)
    return rep

"""Ground sets, student sets as bitmasks, priority rankings, and the
distributional-preference interface.

A student set is a plain ``int`` bitmask over the ground set: bit ``i`` set
means student ``i`` is a member. Set algebra is therefore ``|``, ``&`` and
``& ~``; the helpers below cover the rest (iteration, cardinality, swaps).
"""
from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels

MAX_STUDENTS = 64
#: absolute tolerance for comparing real-valued (non-rational) scores
FLOAT_TOL = 1e-9

StudentSet = int


class SizeMismatch(ValueError):
    """Raised when an equal-size-only preference is asked to compare sets of
    different cardinality."""


class BudgetExceeded(RuntimeError):
    """Raised when an exhaustive enumeration would exceed its configured cap."""


class PreferenceNotCertified(RuntimeError):
    """Raised when a check needs the upper-bound and maximizer properties and
    the preference has not been shown to satisfy them."""


# --------------------------------------------------------------------------
# bitmask helpers


def popcount(mask: StudentSet) -> int:
    return bin(mask).count("1")


def members(mask: StudentSet) -> list[int]:
    """Student ids in ``mask``, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def to_mask(ids: Iterable[int]) -> StudentSet:
    m = 0
    for i in ids:
        m |= 1 << i
    return m


def swap(mask: StudentSet, out: int, into: int) -> StudentSet:
    """``(mask \\ {out}) | {into}``."""
    return (mask & ~(1 << out)) | (1 << into)


def subsets_of_size(mask: StudentSet, k: int) -> list[StudentSet]:
    """All ``k``-subsets of ``mask`` in ascending bitmask order."""
    return [int(x) for x in kernels.submasks_of_size(np.int64(mask), k)]


def all_subsets(mask: StudentSet) -> Iterable[StudentSet]:
    """Every subset of ``mask`` (including the empty set and ``mask`` itself),
    ascending."""
    ids = members(mask)
    for code in range(1 << len(ids)):
        yield to_mask(ids[b] for b in range(len(ids)) if code >> b & 1)


@dataclass(frozen=True)
class GroundSet:
    """The finite universe of students."""

    n: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if not 1 <= self.n <= MAX_STUDENTS:
            raise ValueError(f"ground set size must be in [1, {MAX_STUDENTS}], got {self.n}")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != self.n:
                raise ValueError("one label per student is required")
            if len(set(labels)) != self.n:
                raise ValueError("student labels must be distinct")
            object.__setattr__(self, "labels", labels)

    @property
    def full(self) -> StudentSet:
        return (1 << self.n) - 1

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else f"s{i + 1}"

    def names(self, mask: StudentSet) -> list[str]:
        return [self.label(i) for i in members(mask)]

    def index(self, label: str) -> int:
        if self.labels is not None:
            if label not in self.labels:
                raise KeyError(label)
            return self.labels.index(label)
        if label.startswith("s") and label[1:].isdigit() and 1 <= int(label[1:]) <= self.n:
            return int(label[1:]) - 1
        raise KeyError(label)

    def mask(self, labels: Iterable[str]) -> StudentSet:
        return to_mask(self.index(x) for x in labels)

    def subsets(self, k: int) -> list[StudentSet]:
        return subsets_of_size(self.full, k)


# --------------------------------------------------------------------------
# priority rankings


class PriorityRanking:
    """A strict linear order on the ground set, highest priority first."""

    __slots__ = ("order", "rank")

    def __init__(self, order: Sequence[int]):
        order = tuple(int(s) for s in order)
        if sorted(order) != list(range(len(order))):
            raise ValueError("priority order must be a permutation of 0..n-1")
        self.order = order
        self.rank = tuple(np.argsort(order).tolist())

    @classmethod
    def identity(cls, n: int) -> "PriorityRanking":
        return cls(range(n))

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "PriorityRanking":
        order = list(range(n))
        rng.shuffle(order)
        return cls(order)

    def __len__(self):
        return len(self.order)

    def __eq__(self, other):
        return isinstance(other, PriorityRanking) and self.order == other.order

    def __hash__(self):
        return hash(self.order)

    def __repr__(self):
        return f"PriorityRanking({list(self.order)})"

    def prefers(self, a: int, b: int) -> bool:
        """True iff student ``a`` has strictly higher priority than ``b``."""
        return self.rank[a] < self.rank[b]

    def sorted_members(self, mask: StudentSet) -> list[int]:
        return sorted(members(mask), key=self.rank.__getitem__)

    def scan(self, mask: StudentSet) -> np.ndarray:
        """Members of ``mask`` in priority order, as an int64 array."""
        return np.array(self.sorted_members(mask), dtype=np.int64)


def priority_dominates(pi: PriorityRanking, a: StudentSet, b: StudentSet) -> bool:
    """Rank-by-rank domination of ``b`` by ``a`` under ``pi``."""
    if popcount(a) < popcount(b):
        return False
    sa = pi.sorted_members(a)
    sb = pi.sorted_members(b)
    return all(pi.rank[x] <= pi.rank[y] for x, y in zip(sa, sb))


# --------------------------------------------------------------------------
# comparisons and preferences


class Comparison(enum.Enum):
    BETTER = "strictly_better"
    WORSE = "strictly_worse"
    INDIFFERENT = "indifferent"
    INCOMPARABLE = "incomparable"

    def mirror(self) -> "Comparison":
        return _MIRROR[self]

    @property
    def weakly_better(self) -> bool:
        return self in (Comparison.BETTER, Comparison.INDIFFERENT)

    @classmethod
    def from_relation(cls, ab: bool, ba: bool) -> "Comparison":
        if ab and ba:
            return cls.INDIFFERENT
        if ab:
            return cls.BETTER
        if ba:
            return cls.WORSE
        return cls.INCOMPARABLE


_MIRROR = {
    Comparison.BETTER: Comparison.WORSE,
    Comparison.WORSE: Comparison.BETTER,
    Comparison.INDIFFERENT: Comparison.INDIFFERENT,
    Comparison.INCOMPARABLE: Comparison.INCOMPARABLE,
}


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction, np.integer)) and not isinstance(x, bool)


def compare_values(x, y) -> Comparison:
    """Order two real scores: exact for ints/Fractions, else within FLOAT_TOL."""
    if is_exact(x) and is_exact(y):
        d = Fraction(x) - Fraction(y)
    else:
        d = float(x) - float(y)
        if abs(d) <= FLOAT_TOL:
            d = 0
    if d > 0:
        return Comparison.BETTER
    if d < 0:
        return Comparison.WORSE
    return Comparison.INDIFFERENT


class DistributionalPreference:
    """A preorder over sets of students.

    Subclasses implement :meth:`_compare`. Score-based (complete) families
    override :meth:`scores` as well, which lets the frontier and the
    structural checkers work on vectorised score arrays.
    """

    is_complete = False
    equal_size_only = False
    #: set by families whose preference is the rank function of a matroid
    matroid = None

    def compare(self, a: StudentSet, b: StudentSet) -> Comparison:
        if a == b:
            return Comparison.INDIFFERENT
        if self.equal_size_only and popcount(a) != popcount(b):
            raise SizeMismatch(f"cannot compare sets of size {popcount(a)} and {popcount(b)}")
        return self._compare(a, b)

    def _compare(self, a: StudentSet, b: StudentSet) -> Comparison:
        raise NotImplementedError

    def weakly_prefers(self, a: StudentSet, b: StudentSet) -> bool:
        return self.compare(a, b).weakly_better

    def strictly_prefers(self, a: StudentSet, b: StudentSet) -> bool:
        return self.compare(a, b) is Comparison.BETTER

    def scores(self, masks: np.ndarray):
        """Numeric scores for ``masks`` plus the tie tolerance, or ``None``
        when the family is not score-based."""
        return None

    def relation(self, masks: np.ndarray) -> np.ndarray:
        """The ``geq`` matrix over a family of equal-size sets."""
        scored = self.scores(masks)
        if scored is not None:
            s, tol = scored
            return s[:, None] >= s[None, :] - tol
        m = len(masks)
        geq = np.eye(m, dtype=bool)
        ms = [int(x) for x in masks]
        for i in range(m):
            for j in range(i + 1, m):
                c = self.compare(ms[i], ms[j])
                geq[i, j] = c.weakly_better
                geq[j, i] = c.mirror().weakly_better
        return geq


class FunctionPreference(DistributionalPreference):
    """Wrap an arbitrary comparator ``(a, b) -> Comparison``."""

    def __init__(self, fn, *, is_complete=False, equal_size_only=False):
        self._fn = fn
        self.is_complete = is_complete
        self.equal_size_only = equal_size_only

    def _compare(self, a, b):
        return self._fn(a, b)


def compare(pref: DistributionalPreference, a: StudentSet, b: StudentSet) -> Comparison:
    return pref.compare(a, b)


# --------------------------------------------------------------------------
# reports


@dataclass
class CheckReport:
    """Outcome of an exhaustive (or sampled) property check.

    ``premises`` counts the instances on which the property's hypothesis
    held; a pass with ``premises == 0`` is vacuous.
    """

    name: str
    violations: list = field(default_factory=list)
    premises: int = 0
    checked: int = 0
    total_violations: int | None = None

    def __post_init__(self):
        if self.total_violations is None:
            self.total_violations = len(self.violations)

    @property
    def ok(self) -> bool:
        return self.total_violations == 0

    @property
    def vacuous(self) -> bool:
        return self.ok and self.premises == 0

    def summary(self) -> str:
        state = "pass" if self.ok else "FAIL"
        if self.vacuous:
            state = "pass (vacuous)"
        return f"{self.name}: {state} [{self.premises} premises, {self.total_violations} violations]"


def check_budget(count: int, budget: int | None, what: str):
    if budget is not None and count > budget:
        raise BudgetExceeded(f"{what}: {count} exceeds budget {budget}")


def transitivity_check(
    pref: DistributionalPreference,
    ground: GroundSet,
    size: int,
    budget: int | None = 2_000_000,
    rng: random.Random | None = None,
) -> CheckReport:
    """Look for transitivity and mirror-consistency failures on size-``size``
    sets.

    All triples are examined when their number fits in ``budget``; otherwise
    ``budget`` random triples are drawn.
    """
    if size > ground.n:
        raise ValueError("size exceeds ground set")
    sets = ground.subsets(size)
    m = len(sets)
    rep = CheckReport("transitivity")
    verdict = {}
    for i in range(m):
        for j in range(m):
            verdict[i, j] = pref.compare(sets[i], sets[j])
    for i in range(m):
        if verdict[i, i] is not Comparison.INDIFFERENT:
            rep.violations.append({"kind": "reflexivity", "sets": [sets[i]]})
        if pref.is_complete:
            for j in range(m):
                if verdict[i, j] is Comparison.INCOMPARABLE:
                    rep.violations.append({"kind": "completeness", "sets": [sets[i], sets[j]]})
        for j in range(i + 1, m):
            if verdict[j, i] is not verdict[i, j].mirror():
                rep.violations.append({"kind": "mirror", "sets": [sets[i], sets[j]]})
    exhaustive = budget is None or m**3 <= budget
    if exhaustive:
        triples = itertools.product(range(m), repeat=3)
    else:
        rng = rng or random.Random(0)
        triples = ((rng.randrange(m), rng.randrange(m), rng.randrange(m)) for _ in range(budget))
    for a, b, c in triples:
        rep.checked += 1
        if verdict[a, b].weakly_better and verdict[b, c].weakly_better:
            rep.premises += 1
            if not verdict[a, c].weakly_better:
                rep.violations.append({"kind": "transitivity", "sets": [sets[a], sets[b], sets[c]]})
    rep.total_violations = len(rep.violations)
    return rep

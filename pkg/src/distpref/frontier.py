"""Non-wasteful sets, frontiers, and the three structural property checkers.

The checkers quantify over every pair of capacity-size subsets of the
ground set. They build the weak-preference matrix once (``RelationTable``)
and hand it to the scan kernels in :mod:`distpref.kernels`.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels
from .core import (
    BudgetExceeded,
    CheckReport,
    Comparison,
    DistributionalPreference,
    GroundSet,
    check_budget,
    popcount,
)

#: largest number of non-wasteful sets a single frontier call may enumerate
DEFAULT_MAX_SUBSETS = 200_000
#: largest ground set the structural checkers accept (lookup table is 2**n)
MAX_CHECK_STUDENTS = 20
DEFAULT_MAX_REPORTS = 1000


def non_wasteful_sets(S: int, q: int) -> list[int]:
    """All subsets of ``S`` with ``min(q, |S|)`` members, ascending."""
    if q < 1:
        raise ValueError("capacity must be at least 1")
    return [int(x) for x in kernels.submasks_of_size(np.int64(S), min(q, popcount(S)))]


@dataclass
class FrontierResult:
    input: int
    target_size: int
    members: list[int]
    method: str

    def __contains__(self, mask):
        return mask in self.members

    def __len__(self):
        return len(self.members)


def frontier(
    pref: DistributionalPreference,
    S: int,
    q: int,
    *,
    max_subsets: int | None = DEFAULT_MAX_SUBSETS,
    method: str | None = None,
) -> FrontierResult:
    """Undominated members of ``NW(S)``.

    ``method`` forces ``"complete"`` (single max-class scan; requires a
    complete preference) or ``"pairwise"`` (undominated filter over the full
    relation). By default complete preferences take the scan.
    """
    if q < 1:
        raise ValueError("capacity must be at least 1")
    k = min(q, popcount(S))
    check_budget(comb(popcount(S), k), max_subsets, "non-wasteful subsets")
    nw = kernels.submasks_of_size(np.int64(S), k)
    if method is None:
        method = "complete" if pref.is_complete else "pairwise"
    if len(nw) == 1:
        return FrontierResult(S, k, [int(nw[0])], method)
    if method == "complete":
        if not pref.is_complete:
            raise ValueError("the single-pass scan needs a complete preference")
        scored = pref.scores(nw)
        if scored is not None:
            s, tol = scored
            keep = kernels.top_class(s, tol)
            picked = [int(x) for x in nw[keep]]
        else:
            picked = _max_class_scan(pref, [int(x) for x in nw])
    elif method == "pairwise":
        keep = kernels.undominated(pref.relation(nw))
        picked = [int(x) for x in nw[keep]]
    else:
        raise ValueError(f"unknown frontier method {method!r}")
    return FrontierResult(S, k, picked, method)


def _max_class_scan(pref, sets):
    best = [sets[0]]
    for x in sets[1:]:
        c = pref.compare(x, best[0])
        if c is Comparison.BETTER:
            best = [x]
        elif c is Comparison.INDIFFERENT:
            best.append(x)
        elif c is Comparison.INCOMPARABLE:
            raise ValueError("preference declared complete returned Incomparable")
    return best


# --------------------------------------------------------------------------
# structural properties


@dataclass
class RelationTable:
    """Weak-preference matrix over all size-``q`` subsets of the ground set."""

    ground: GroundSet
    q: int
    masks: np.ndarray
    geq: np.ndarray
    lookup: np.ndarray

    @classmethod
    def build(cls, pref: DistributionalPreference, ground: GroundSet, q: int,
              max_subsets: int | None = DEFAULT_MAX_SUBSETS) -> "RelationTable":
        if ground.n > MAX_CHECK_STUDENTS:
            raise BudgetExceeded(f"structural checks support at most {MAX_CHECK_STUDENTS} students")
        if q < 1:
            raise ValueError("capacity must be at least 1")
        check_budget(comb(ground.n, q), max_subsets, "capacity-size subsets")
        masks = kernels.submasks_of_size(np.int64(ground.full), q)
        geq = np.ascontiguousarray(pref.relation(masks), dtype=np.bool_)
        lookup = kernels.subset_lookup(masks, ground.n)
        return cls(ground, q, masks, geq, lookup)


def _table(pref, ground, q, table):
    return table if table is not None else RelationTable.build(pref, ground, q)


def check_upper_bound_property(pref, ground: GroundSet, q: int, *, table=None,
                               max_reports=DEFAULT_MAX_REPORTS) -> CheckReport:
    """Every incomparable pair must have a non-wasteful subset of its union
    strictly above one of them."""
    t = _table(pref, ground, q, table)
    prem, bad, wit = kernels.upper_bound_scan(t.masks, t.geq, max_reports)
    viol = [{"S": int(t.masks[i]), "S2": int(t.masks[j])} for i, j in wit.tolist()]
    return CheckReport("upper-bound", viol, int(prem), comb(len(t.masks), 2), int(bad))


def check_maximizer_property(pref, ground: GroundSet, q: int, *, table=None,
                             max_reports=DEFAULT_MAX_REPORTS) -> CheckReport:
    """Two maximizers of their union need a symmetric indifferent swap."""
    t = _table(pref, ground, q, table)
    prem, bad, wit = kernels.maximizer_scan(t.masks, t.geq, t.lookup, max_reports)
    viol = [{"S": int(t.masks[i]), "S2": int(t.masks[j])} for i, j in wit.tolist()]
    return CheckReport("maximizer", viol, int(prem), comb(len(t.masks), 2), int(bad))


def check_improvement_property(pref, ground: GroundSet, q: int, *, table=None,
                               max_reports=DEFAULT_MAX_REPORTS) -> CheckReport:
    """A student crucial to ``S`` must strictly improve ``S2`` when swapped in."""
    t = _table(pref, ground, q, table)
    prem, bad, wit = kernels.improvement_scan(t.masks, t.geq, t.lookup, max_reports)
    viol = [{"S": int(t.masks[i]), "S2": int(t.masks[j]), "s": int(s)} for i, j, s in wit.tolist()]
    m = len(t.masks)
    return CheckReport("improvement", viol, int(prem), m * (m - 1), int(bad))


@dataclass
class Certificate:
    """Results of the three structural checks for one (preference, ground, q)."""

    upper_bound: CheckReport
    maximizer: CheckReport
    improvement: CheckReport | None = None

    @property
    def supports_choice(self) -> bool:
        """Upper-bound and maximizer hold: the greedy rule is characterised."""
        return self.upper_bound.ok and self.maximizer.ok

    @property
    def supports_path_independence(self) -> bool:
        return self.supports_choice and self.improvement is not None and self.improvement.ok


def certify(pref, ground: GroundSet, q: int, *, improvement=True,
            max_reports=DEFAULT_MAX_REPORTS) -> Certificate:
    """Run the structural checks for capacity ``q``.

    When ``q > ground.n`` there are no capacity-size sets and every check
    passes vacuously.
    """
    if q > ground.n:
        empty = [CheckReport(n) for n in ("upper-bound", "maximizer", "improvement")]
        return Certificate(empty[0], empty[1], empty[2] if improvement else None)
    t = RelationTable.build(pref, ground, q)
    ub = check_upper_bound_property(pref, ground, q, table=t, max_reports=max_reports)
    mx = check_maximizer_property(pref, ground, q, table=t, max_reports=max_reports)
    im = check_improvement_property(pref, ground, q, table=t, max_reports=max_reports) if improvement else None
    return Certificate(ub, mx, im)

"""The greedy distributional choice rule and choice-rule axiom checkers."""
from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass
from math import prod
from typing import Callable, Iterable

import numpy as np

from . import kernels
from .core import (
    CheckReport,
    check_budget,
    DistributionalPreference,
    GroundSet,
    PreferenceNotCertified,
    PriorityRanking,
    all_subsets,
    members,
    popcount,
    priority_dominates,
    subsets_of_size,
    swap,
)
from .frontier import DEFAULT_MAX_SUBSETS, Certificate, certify, frontier
from .matroid import FrontierMatroid, greedy_basis


class ChoiceRule:
    """A map from menus to chosen subsets, with capacity ``q``.

    Results are memoised per menu; subclasses implement :meth:`_choose`.
    """

    q: int

    def __init__(self, q: int):
        self.q = q
        self._memo: dict[int, int] = {}

    def __call__(self, S: int) -> int:
        out = self._memo.get(S)
        if out is None:
            out = self._memo[S] = self._choose(S)
        return out

    def _choose(self, S: int) -> int:
        raise NotImplementedError


class FunctionRule(ChoiceRule):
    def __init__(self, fn: Callable[[int], int], q: int):
        super().__init__(q)
        self._fn = fn

    def _choose(self, S):
        return self._fn(S)


class TableRule(ChoiceRule):
    """A rule known only on the menus of an explicit table."""

    def __init__(self, table: dict[int, int], q: int):
        super().__init__(q)
        self.table = dict(table)

    def _choose(self, S):
        return self.table[S]

    @property
    def menus(self):
        return sorted(self.table)


class DistributionalChoice(ChoiceRule):
    """Greedy scan in priority order, keeping a student whenever the kept set
    still extends to some frontier member."""

    def __init__(self, pref: DistributionalPreference, pi: PriorityRanking, q: int, *,
                 fast_path: bool = True, max_subsets: int | None = DEFAULT_MAX_SUBSETS):
        super().__init__(q)
        self.pref = pref
        self.pi = pi
        self.fast_path = fast_path
        self.max_subsets = max_subsets

    def _choose(self, S):
        if self.fast_path and self.pref.matroid is not None:
            return matroid_fast_choice(self.pref.matroid, self.pi, self.q, S)
        return enumerated_choice(self.pref, self.pi, self.q, S, max_subsets=self.max_subsets)


def enumerated_choice(pref, pi: PriorityRanking, q: int, S: int, *, max_subsets=DEFAULT_MAX_SUBSETS) -> int:
    if S == 0:
        return 0
    f = frontier(pref, S, q, max_subsets=max_subsets)
    fam = np.array(f.members, dtype=np.int64)
    return int(kernels.greedy_choice(fam, pi.scan(S)))


def matroid_fast_choice(matroid, pi: PriorityRanking, q: int, S: int) -> int:
    """Greedy basis of the matroid whose bases are the maximum-rank
    ``min(q, |S|)``-subsets of ``S``."""
    if S == 0:
        return 0
    return greedy_basis(FrontierMatroid(matroid, S, min(q, popcount(S))), S, pi)


def distributional_choice(pref, pi: PriorityRanking, q: int, S: int, *, fast_path=True,
                          max_subsets=DEFAULT_MAX_SUBSETS) -> int:
    if fast_path and pref.matroid is not None:
        return matroid_fast_choice(pref.matroid, pi, q, S)
    return enumerated_choice(pref, pi, q, S, max_subsets=max_subsets)


def top_priority_rule(pi: PriorityRanking, q: int) -> ChoiceRule:
    """Choose the ``min(q, |S|)`` highest-priority members; ignores the
    distributional preference."""
    return FunctionRule(lambda S: sum(1 << s for s in pi.sorted_members(S)[:q]), q)


# --------------------------------------------------------------------------
# axioms


def _menus(ground: GroundSet, menus: Iterable[int] | None):
    return range(1 << ground.n) if menus is None else menus


def check_non_wasteful(rule: ChoiceRule, ground: GroundSet, q: int, menus=None) -> CheckReport:
    rep = CheckReport("non-wasteful")
    for S in _menus(ground, menus):
        rep.checked += 1
        rep.premises += 1
        T = rule(S)
        if popcount(T) != min(q, popcount(S)) or T & ~S:
            rep.violations.append({"menu": S, "chosen": T})
    rep.total_violations = len(rep.violations)
    return rep


def check_promotes(rule: ChoiceRule, pref, ground: GroundSet, q: int, menus=None) -> CheckReport:
    rep = CheckReport("promotes")
    for S in _menus(ground, menus):
        rep.checked += 1
        T = rule(S)
        for U in subsets_of_size(S, popcount(T)):
            if U == T:
                continue
            rep.premises += 1
            if pref.strictly_prefers(U, T):
                rep.violations.append({"menu": S, "chosen": T, "better": U})
                break
    rep.total_violations = len(rep.violations)
    return rep


def check_no_justified_envy(rule: ChoiceRule, pref, pi: PriorityRanking, ground: GroundSet,
                            menus=None) -> CheckReport:
    rep = CheckReport("no-justified-envy")
    for S in _menus(ground, menus):
        rep.checked += 1
        T = rule(S)
        for v in _envy_violations(pref, pi, S, T):
            rep.violations.append(v)
    rep.premises = rep.checked
    rep.total_violations = len(rep.violations)
    return rep


def _envy_violations(pref, pi, S, T):
    for s in members(T):
        for t in members(S & ~T):
            if pref.weakly_prefers(swap(T, s, t), T) and not pi.prefers(s, t):
                yield {"menu": S, "chosen": T, "admitted": s, "envious": t}


@dataclass
class PathIndependenceResult:
    direct: CheckReport
    consistency: CheckReport
    substitutability: CheckReport

    @property
    def ok(self) -> bool:
        return self.direct.ok

    @property
    def decomposition_agrees(self) -> bool:
        """Direct identity holds iff consistency and substitutability both do."""
        return self.direct.ok == (self.consistency.ok and self.substitutability.ok)

    @property
    def reports(self):
        return [self.direct, self.consistency, self.substitutability]


def check_path_independence(rule: ChoiceRule, ground: GroundSet, *, menus=None,
                            max_pairs: int = 1 << 18, seed: int = 0) -> PathIndependenceResult:
    """Check ``Ch(S | S2) == Ch(Ch(S) | S2)`` on all menu pairs (sampled
    beyond ``max_pairs``), and separately consistency and substitutability."""
    menu_list = list(_menus(ground, menus))
    direct = CheckReport("path-independence")
    if len(menu_list) ** 2 <= max_pairs:
        pairs = itertools.product(menu_list, repeat=2)
    else:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, len(menu_list), size=(max_pairs, 2))
        pairs = ((menu_list[a], menu_list[b]) for a, b in idx)
    for S, S2 in pairs:
        direct.checked += 1
        direct.premises += 1
        lhs = rule(S | S2)
        rhs = rule(rule(S) | S2)
        if lhs != rhs:
            direct.violations.append({"S": S, "S2": S2, "lhs": lhs, "rhs": rhs})
    direct.total_violations = len(direct.violations)

    cons = CheckReport("consistency")
    subs = CheckReport("substitutability")
    for S in menu_list:
        T = rule(S)
        for s in members(S & ~T):
            cons.premises += 1
            if rule(S & ~(1 << s)) != T:
                cons.violations.append({"menu": S, "removed": s})
        for s in members(T):
            for r in members(S):
                if r == s:
                    continue
                subs.premises += 1
                if not rule(S & ~(1 << r)) >> s & 1:
                    subs.violations.append({"menu": S, "student": s, "removed": r})
        cons.checked += 1
        subs.checked += 1
    cons.total_violations = len(cons.violations)
    subs.total_violations = len(subs.violations)
    return PathIndependenceResult(direct, cons, subs)


# --------------------------------------------------------------------------
# comparative statics


def _require_certified(pref, ground, q, certificate):
    if certificate is None:
        certificate = certify(pref, ground, q, improvement=False)
    if not isinstance(certificate, Certificate) or not certificate.supports_choice:
        raise PreferenceNotCertified("upper-bound and maximizer properties are required")
    return certificate


def trichotomy_clauses(pref, pi, chosen: int, alt: int) -> tuple[bool, bool, bool]:
    """(wastefulness, distributional inferiority, priority inferiority) of
    ``alt`` relative to ``chosen``."""
    waste = popcount(chosen) > popcount(alt)
    inferior = popcount(chosen) == popcount(alt) and pref.strictly_prefers(chosen, alt)
    dominated = priority_dominates(pi, chosen, alt)
    return waste, inferior, dominated


def check_trichotomy(alt: ChoiceRule, pref, pi: PriorityRanking, q: int, ground: GroundSet, *,
                     certificate: Certificate | None = None, menus=None) -> CheckReport:
    """Wherever ``alt`` differs from the greedy rule, one of the three
    inferiority clauses must hold."""
    _require_certified(pref, ground, q, certificate)
    ch = DistributionalChoice(pref, pi, q)
    rep = CheckReport("trichotomy")
    for S in _menus(ground, menus):
        rep.checked += 1
        a, c = alt(S), ch(S)
        if a == c:
            continue
        rep.premises += 1
        if not any(trichotomy_clauses(pref, pi, c, a)):
            rep.violations.append({"menu": S, "greedy": c, "alternative": a})
    rep.total_violations = len(rep.violations)
    return rep


def trichotomy_exhaustive(pref, pi: PriorityRanking, q: int, ground: GroundSet, *,
                          candidates: str = "frontier", certificate=None) -> CheckReport:
    """Check every alternative rule at once.

    The clauses are menu-local, so quantifying over all rules amounts to
    quantifying over every candidate choice on every menu: frontier members
    (``"frontier"``) or every subset of the menu with at most ``q`` members
    (``"any"``).
    """
    _require_certified(pref, ground, q, certificate)
    ch = DistributionalChoice(pref, pi, q)
    rep = CheckReport(f"trichotomy-exhaustive[{candidates}]")
    for S in range(1 << ground.n):
        c = ch(S)
        if candidates == "frontier":
            cands = frontier(pref, S, q).members
        else:
            cands = [T for T in all_subsets(S) if popcount(T) <= q]
        for T in cands:
            rep.checked += 1
            if T == c:
                continue
            rep.premises += 1
            if not any(trichotomy_clauses(pref, pi, c, T)):
                rep.violations.append({"menu": S, "greedy": c, "alternative": T})
    rep.total_violations = len(rep.violations)
    return rep


@dataclass
class RuleCensus:
    """Per-menu frontier choices that satisfy no-justified-envy."""

    passing: dict[int, list[int]]
    frontier_sizes: dict[int, int]

    @property
    def rule_count(self) -> int:
        """Number of frontier-valued rules; every one is non-wasteful and
        promotes the preference."""
        return prod(self.frontier_sizes.values())

    @property
    def passing_count(self) -> int:
        return prod(len(v) for v in self.passing.values())

    def unique_rule(self) -> dict[int, int] | None:
        if self.passing_count != 1:
            return None
        return {S: v[0] for S, v in self.passing.items()}


def frontier_rule_census(pref, pi: PriorityRanking, q: int, ground: GroundSet) -> RuleCensus:
    """Count the frontier-valued rules passing all three choice axioms.

    The axioms constrain each menu separately, so the passing rules are
    exactly the product of the per-menu passing choices.
    """
    passing, sizes = {}, {}
    for S in range(1 << ground.n):
        fr = frontier(pref, S, q).members
        sizes[S] = len(fr)
        passing[S] = [T for T in fr if next(_envy_violations(pref, pi, S, T), None) is None]
    return RuleCensus(passing, sizes)


def enumerate_frontier_rules(pref, q: int, ground: GroundSet, *, limit: int = 200_000):
    """Yield every frontier-valued rule as a ``{menu: choice}`` dict.

    Literal enumeration for tiny ground sets; raises when the number of rules
    exceeds ``limit``.
    """
    menus = list(range(1 << ground.n))
    fams = [frontier(pref, S, q).members for S in menus]
    check_budget(prod(len(f) for f in fams), limit, "frontier-valued rules")
    for combo in itertools.product(*fams):
        yield dict(zip(menus, combo))


# --------------------------------------------------------------------------
# revealed priorities


@dataclass
class CycleWitness:
    """A revealed-priority cycle: ``students[k]`` chosen over
    ``students[k+1]`` at ``menus[k]`` (indices wrap)."""

    students: list[int]
    menus: list[int]


@dataclass
class RevealResult:
    edges: dict[tuple[int, int], int]
    ranking: PriorityRanking | None = None
    cycle: CycleWitness | None = None

    @property
    def acyclic(self) -> bool:
        return self.cycle is None


def revealed_relation(rule: ChoiceRule, pref, ground: GroundSet, menus=None) -> dict[tuple[int, int], int]:
    """Edges ``(s, t) -> first menu`` where ``s`` is chosen, ``t`` rejected,
    and swapping them is weakly preferred."""
    edges: dict[tuple[int, int], int] = {}
    for S in _menus(ground, menus):
        T = rule(S)
        for s in members(T):
            for t in members(S & ~T):
                if (s, t) not in edges and pref.weakly_prefers(swap(T, s, t), T):
                    edges[s, t] = S
    return edges


def _shortest_cycle(n, edges):
    adj = [[] for _ in range(n)]
    for s, t in sorted(edges):
        adj[s].append(t)
    best = None
    for start in range(n):
        parent = {start: None}
        dq = deque([start])
        found = None
        while dq and found is None:
            u = dq.popleft()
            for v in adj[u]:
                if v == start:
                    found = u
                    break
                if v not in parent:
                    parent[v] = u
                    dq.append(v)
        if found is None:
            continue
        path = [found]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()
        if best is None or len(path) < len(best):
            best = path
    return best


def reveal_priorities(rule: ChoiceRule, pref, ground: GroundSet, q: int | None = None,
                      menus=None) -> RevealResult:
    """Extract the revealed priority relation and either complete it to a
    ranking (ties broken by ascending student id) or return a shortest
    cycle."""
    edges = revealed_relation(rule, pref, ground, menus)
    cyc = _shortest_cycle(ground.n, edges)
    if cyc is not None:
        ring = cyc + cyc[:1]
        return RevealResult(edges, cycle=CycleWitness(cyc, [edges[a, b] for a, b in zip(ring, ring[1:])]))
    indeg = [0] * ground.n
    out = [[] for _ in range(ground.n)]
    for s, t in edges:
        out[s].append(t)
        indeg[t] += 1
    heap = [s for s in range(ground.n) if indeg[s] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        s = heapq.heappop(heap)
        order.append(s)
        for t in out[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                heapq.heappush(heap, t)
    return RevealResult(edges, ranking=PriorityRanking(order))


__all__ = [
    "ChoiceRule",
    "CycleWitness",
    "DistributionalChoice",
    "FunctionRule",
    "PathIndependenceResult",
    "RevealResult",
    "RuleCensus",
    "TableRule",
    "check_no_justified_envy",
    "check_non_wasteful",
    "check_path_independence",
    "check_promotes",
    "check_trichotomy",
    "distributional_choice",
    "enumerate_frontier_rules",
    "enumerated_choice",
    "frontier_rule_census",
    "matroid_fast_choice",
    "reveal_priorities",
    "revealed_relation",
    "top_priority_rule",
    "trichotomy_clauses",
    "trichotomy_exhaustive",
]

"""Two-sided school-choice markets, student-proposing deferred acceptance,
matching-level axiom checkers and exhaustive strategy-proofness tests."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from math import comb
from typing import Callable, Sequence

from .choice import DistributionalChoice
from .core import (
    BudgetExceeded,
    CheckReport,
    DistributionalPreference,
    GroundSet,
    PriorityRanking,
    members,
    popcount,
    subsets_of_size,
    swap,
)

OUTSIDE = None


@dataclass(frozen=True)
class School:
    name: str
    capacity: int
    priority: PriorityRanking
    preference: DistributionalPreference

    def __post_init__(self):
        if self.capacity < 1:
            raise ValueError(f"school {self.name}: capacity must be at least 1")


@dataclass(frozen=True)
class Matching:
    """``assignment[s]`` is a school index or ``None`` (outside option)."""

    assignment: tuple

    def assigned(self, c: int) -> int:
        m = 0
        for s, a in enumerate(self.assignment):
            if a == c:
                m |= 1 << s
        return m

    def __getitem__(self, s):
        return self.assignment[s]


@dataclass
class Market:
    ground: GroundSet
    schools: list[School]
    prefs: list[tuple[int, ...]]
    rules: list = field(default=None, repr=False)

    def __post_init__(self):
        self.prefs = [tuple(p) for p in self.prefs]
        if len(self.prefs) != self.ground.n:
            raise ValueError("one preference list per student is required")
        for s, p in enumerate(self.prefs):
            if len(set(p)) != len(p):
                raise ValueError(f"student {s}: duplicate schools in preference list")
            if any(not 0 <= c < len(self.schools) for c in p):
                raise ValueError(f"student {s}: unknown school in preference list")
        if self.rules is None:
            self.rules = [DistributionalChoice(c.preference, c.priority, c.capacity) for c in self.schools]

    def with_preferences(self, prefs) -> "Market":
        """Same schools (and shared choice memo) with other student reports."""
        return replace(self, prefs=list(prefs))

    def rank(self, s: int, c) -> float:
        """Position of ``c`` in student ``s``'s list; the outside option
        sits right after the list, unlisted schools below it."""
        p = self.prefs[s]
        if c is OUTSIDE:
            return len(p)
        try:
            return p.index(c)
        except ValueError:
            return float("inf")

    def prefers(self, s: int, c, d) -> bool:
        """``c P_s d``."""
        return self.rank(s, c) < self.rank(s, d)

    def weakly_prefers(self, s: int, c, d) -> bool:
        return self.rank(s, c) <= self.rank(s, d)


# --------------------------------------------------------------------------
# deferred acceptance


@dataclass
class DARound:
    proposals: dict[int, int]
    held: tuple[int, ...]
    rejected: int


@dataclass
class DAResult:
    matching: Matching
    rounds: list[DARound] | None


def deferred_acceptance(market: Market, *, school_order: Sequence[int] | None = None,
                        trace: bool | None = None) -> DAResult:
    """Round-synchronous student-proposing deferred acceptance.

    All rejected students propose simultaneously; every school then applies
    its choice rule to its held set plus new proposals. The round trace is
    kept by default for markets of up to 16 students.
    """
    n, C = market.ground.n, len(market.schools)
    if trace is None:
        trace = n <= 16
    order = list(range(C)) if school_order is None else list(school_order)
    nxt = [0] * n
    held = [0] * C
    rounds: list[DARound] = []
    proposers = list(range(n))
    for _ in range(n * C + 1):
        props: dict[int, int] = {}
        for s in proposers:
            if nxt[s] < len(market.prefs[s]):
                c = market.prefs[s][nxt[s]]
                nxt[s] += 1
                props[c] = props.get(c, 0) | 1 << s
        rejected = 0
        for c in order:
            pool = held[c] | props.get(c, 0)
            chosen = market.rules[c](pool)
            rejected |= pool & ~chosen
            held[c] = chosen
        if trace:
            rounds.append(DARound(props, tuple(held), rejected))
        if not rejected:
            break
        proposers = members(rejected)
    else:  # pragma: no cover - bounded by n * C proposals
        raise RuntimeError("deferred acceptance did not terminate")
    assignment = [OUTSIDE] * n
    for c in range(C):
        for s in members(held[c]):
            assignment[s] = c
    return DAResult(Matching(tuple(assignment)), rounds if trace else None)


def sequential_deferred_acceptance(market: Market, student_order: Sequence[int] | None = None) -> Matching:
    """One proposal at a time; with path-independent rules this reaches the
    same matching as the round-synchronous algorithm."""
    n, C = market.ground.n, len(market.schools)
    nxt = [0] * n
    held = [0] * C
    free = list(range(n)) if student_order is None else list(student_order)
    while free:
        s = free.pop(0)
        if nxt[s] >= len(market.prefs[s]):
            continue
        c = market.prefs[s][nxt[s]]
        nxt[s] += 1
        pool = held[c] | 1 << s
        held[c] = market.rules[c](pool)
        free.extend(members(pool & ~held[c]))
    assignment = [OUTSIDE] * n
    for c in range(C):
        for s in members(held[c]):
            assignment[s] = c
    return Matching(tuple(assignment))


def da_matching(market: Market) -> Matching:
    return deferred_acceptance(market, trace=False).matching


def immediate_acceptance(market: Market) -> Matching:
    """Boston-style control: in round ``k`` each unassigned student applies to
    their ``k``-th choice and schools permanently admit by priority up to
    their remaining seats."""
    n = market.ground.n
    assignment = [OUTSIDE] * n
    seats = [sch.capacity for sch in market.schools]
    longest = max((len(p) for p in market.prefs), default=0)
    for k in range(longest):
        apps: dict[int, list[int]] = {}
        for s in range(n):
            if assignment[s] is OUTSIDE and k < len(market.prefs[s]):
                apps.setdefault(market.prefs[s][k], []).append(s)
        for c, studs in apps.items():
            pi = market.schools[c].priority
            for s in sorted(studs, key=pi.rank.__getitem__)[: seats[c]]:
                assignment[s] = c
                seats[c] -= 1
    return Matching(tuple(assignment))


# --------------------------------------------------------------------------
# matching axioms


def check_individual_rationality(market: Market, mu: Matching) -> CheckReport:
    rep = CheckReport("individual-rationality", checked=market.ground.n, premises=market.ground.n)
    for s, c in enumerate(mu.assignment):
        if c is not OUTSIDE and c not in market.prefs[s]:
            rep.violations.append({"student": s, "school": c})
    rep.total_violations = len(rep.violations)
    return rep


def check_capacity(market: Market, mu: Matching) -> CheckReport:
    rep = CheckReport("capacity", checked=len(market.schools))
    for c, sch in enumerate(market.schools):
        if popcount(mu.assigned(c)) > sch.capacity:
            rep.violations.append({"school": c})
    rep.total_violations = len(rep.violations)
    return rep


def check_matching_non_wasteful(market: Market, mu: Matching) -> CheckReport:
    rep = CheckReport("non-wasteful")
    for c, sch in enumerate(market.schools):
        full = popcount(mu.assigned(c)) == sch.capacity
        for s in range(market.ground.n):
            if market.prefers(s, c, mu[s]):
                rep.premises += 1
                if not full:
                    rep.violations.append({"school": c, "student": s})
        rep.checked += 1
    rep.total_violations = len(rep.violations)
    return rep


def demand_set(market: Market, mu: Matching, c: int) -> int:
    """Students who weakly prefer ``c`` to their assignment."""
    d = 0
    for s in range(market.ground.n):
        if mu[s] == c or market.prefers(s, c, mu[s]):
            d |= 1 << s
    return d


def check_matching_promotes(market: Market, mu: Matching, *, max_subsets: int = 200_000) -> CheckReport:
    rep = CheckReport("promotes")
    for c, sch in enumerate(market.schools):
        rep.checked += 1
        held = mu.assigned(c)
        D = demand_set(market, mu, c)
        k = popcount(held)
        if comb(popcount(D), k) > max_subsets:
            raise BudgetExceeded(f"school {c}: too many demand subsets")
        for U in subsets_of_size(D, k):
            if U == held:
                continue
            rep.premises += 1
            if sch.preference.strictly_prefers(U, held):
                rep.violations.append({"school": c, "assigned": held, "better": U})
                break
    rep.total_violations = len(rep.violations)
    return rep


def check_matching_no_justified_envy(market: Market, mu: Matching) -> CheckReport:
    rep = CheckReport("no-justified-envy")
    for c, sch in enumerate(market.schools):
        held = mu.assigned(c)
        for s in members(held):
            for t in range(market.ground.n):
                if t == s or not market.prefers(t, c, mu[t]):
                    continue
                rep.premises += 1
                if sch.preference.weakly_prefers(swap(held, s, t), held) and not sch.priority.prefers(s, t):
                    rep.violations.append({"school": c, "admitted": s, "envious": t})
        rep.checked += 1
    rep.total_violations = len(rep.violations)
    return rep


MATCHING_CHECKS = {
    "individual-rationality": check_individual_rationality,
    "non-wasteful": check_matching_non_wasteful,
    "promotes": check_matching_promotes,
    "no-justified-envy": check_matching_no_justified_envy,
}


def check_matching(market: Market, mu: Matching) -> list[CheckReport]:
    return [check_capacity(market, mu)] + [f(market, mu) for f in MATCHING_CHECKS.values()]


# --------------------------------------------------------------------------
# strategy-proofness


def all_reports(num_schools: int) -> list[tuple[int, ...]]:
    """Every strict ranking of every subset of schools (truncations included),
    shortest first."""
    out = []
    for r in range(num_schools + 1):
        out.extend(itertools.permutations(range(num_schools), r))
    return out


def check_strategy_proofness(market: Market, mechanism: Callable[[Market], Matching] = da_matching, *,
                             max_runs: int = 100_000, students=None) -> CheckReport:
    """Try every alternative report for every student against the truthful
    profile; report each strictly profitable deviation."""
    reports = all_reports(len(market.schools))
    studs = range(market.ground.n) if students is None else students
    runs = len(reports) * len(list(studs))
    if runs > max_runs:
        raise BudgetExceeded(f"{runs} deviation runs exceed cap {max_runs}")
    truth = mechanism(market)
    rep = CheckReport("strategy-proofness")
    for s in studs:
        for r in reports:
            if r == market.prefs[s]:
                continue
            rep.checked += 1
            rep.premises += 1
            prefs = list(market.prefs)
            prefs[s] = r
            out = mechanism(market.with_preferences(prefs))
            if market.prefers(s, out[s], truth[s]):
                rep.violations.append({"student": s, "report": list(r), "truthful": truth[s], "deviation": out[s]})
    rep.total_violations = len(rep.violations)
    return rep


# --------------------------------------------------------------------------
# brute-force oracles


def all_matchings(market: Market):
    n, C = market.ground.n, len(market.schools)
    caps = [sch.capacity for sch in market.schools]
    for combo in itertools.product([OUTSIDE] + list(range(C)), repeat=n):
        load = [0] * C
        for c in combo:
            if c is not OUTSIDE:
                load[c] += 1
        if all(x <= k for x, k in zip(load, caps)):
            yield Matching(combo)


def axiomatic_matchings(market: Market) -> list[Matching]:
    """Every matching passing individual rationality, non-wastefulness,
    promotion and no justified envy (exhaustive)."""
    out = []
    for mu in all_matchings(market):
        if all(f(market, mu).ok for f in MATCHING_CHECKS.values()):
            out.append(mu)
    return out


def search_axiomatic_mechanisms(market: Market, *, profiles=None, limit: int = 2):
    """Backtracking search for mechanisms (profile -> matching tables) that
    satisfy all five axioms on a profile domain.

    ``profiles`` defaults to every combination of reports (the full domain).
    Strategy-proofness is imposed between profiles that differ in exactly
    one student's report, in both directions. Returns up to ``limit``
    mechanisms as dicts.
    """
    n = market.ground.n
    if profiles is None:
        profiles = list(itertools.product(all_reports(len(market.schools)), repeat=n))
    profiles = [tuple(tuple(r) for r in p) for p in profiles]
    cands = [axiomatic_matchings(market.with_preferences(p)) for p in profiles]
    neighbours = []
    for i, p in enumerate(profiles):
        nb = []
        for j, p2 in enumerate(profiles[:i]):
            diff = [s for s in range(n) if p[s] != p2[s]]
            if len(diff) == 1:
                nb.append((j, diff[0]))
        neighbours.append(nb)

    def rank(report, c):
        if c is OUTSIDE:
            return len(report)
        return report.index(c) if c in report else float("inf")

    found = []
    choice = [None] * len(profiles)

    def consistent(i, mu):
        for j, s in neighbours[i]:
            other = choice[j]
            # s truthfully at profile i must not gain by reporting profiles[j][s], and vice versa
            if rank(profiles[i][s], other[s]) < rank(profiles[i][s], mu[s]):
                return False
            if rank(profiles[j][s], mu[s]) < rank(profiles[j][s], other[s]):
                return False
        return True

    def go(i):
        if len(found) >= limit:
            return
        if i == len(profiles):
            found.append({profiles[k]: choice[k] for k in range(len(profiles))})
            return
        for mu in cands[i]:
            if consistent(i, mu):
                choice[i] = mu
                go(i + 1)
                choice[i] = None

    go(0)
    return found

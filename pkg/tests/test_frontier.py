import random
from math import comb

import numpy as np
import pytest

from distpref.core import BudgetExceeded, Comparison, FunctionPreference, GroundSet, compare_values, popcount
from distpref.frontier import (
    RelationTable,
    certify,
    check_improvement_property,
    check_maximizer_property,
    check_upper_bound_property,
    frontier,
    non_wasteful_sets,
)
from distpref.matroid import check_base_axioms
from distpref.preferences import additive_preference, indifferent_preference, pointwise_preference

import families
import oracles

B, I, X = Comparison.BETTER, Comparison.INDIFFERENT, Comparison.INCOMPARABLE
BIG = 10**9


def pareto_preference(n, rng):
    """Componentwise order on two random additive scores: a partial order."""
    u = [rng.randint(0, 3) for _ in range(n)]
    v = [rng.randint(0, 3) for _ in range(n)]

    def cmp(a, b):
        du = sum(u[s] for s in range(n) if a >> s & 1) - sum(u[s] for s in range(n) if b >> s & 1)
        dv = sum(v[s] for s in range(n) if a >> s & 1) - sum(v[s] for s in range(n) if b >> s & 1)
        if du >= 0 and dv >= 0:
            return I if du == dv == 0 else B
        if du <= 0 and dv <= 0:
            return Comparison.WORSE
        return X

    return FunctionPreference(cmp)


def random_score_preference(n, rng, levels=3):
    """Complete preorder from independent random scores per set."""
    table = {}

    def score(m):
        if m not in table:
            table[m] = rng.randrange(levels)
        return table[m]

    return FunctionPreference(lambda a, b: compare_values(score(a), score(b)), is_complete=True)


# NW / F --------------------------------------------------------------------


def test_non_wasteful_sets():
    assert non_wasteful_sets(0b10101, 5) == [0b10101]
    assert len(non_wasteful_sets(0b11111, 3)) == 10
    rng = random.Random(0)
    for _ in range(100):
        S, q = rng.getrandbits(10), rng.randint(1, 6)
        nw = non_wasteful_sets(S, q)
        assert len(nw) == comb(popcount(S), min(q, popcount(S)))
        assert nw == sorted(nw)
        assert nw == sorted(oracles.nw(S, q))


def test_non_wasteful_rejects_zero_capacity():
    with pytest.raises(ValueError):
        non_wasteful_sets(0b11, 0)


def test_floors_ceilings_frontier(fc):
    p = fc.dichotomous
    full = frontier(p, fc.ground.full, 3)
    assert sorted(full.members) == [fc.m("s1", "s4", "s5"), fc.m("s2", "s4", "s5"), fc.m("s3", "s4", "s5")]
    assert full.target_size == 3 and full.method == "complete"
    short = frontier(p, fc.m("s1", "s2", "s3", "s4"), 3)
    assert sorted(short.members) == oracles.nw(fc.m("s1", "s2", "s3", "s4"), 3)


def test_injective_additive_frontier_is_singleton():
    p = additive_preference([5, 3, 8, 1, 9, 2])
    assert frontier(p, 0b111111, 3).members == [0b010101]
    assert frontier(p, 0b001011, 2).members == [0b000011]


def test_frontier_budget():
    with pytest.raises(BudgetExceeded):
        frontier(indifferent_preference(20), (1 << 20) - 1, 10, max_subsets=1000)


def test_frontier_method_selection():
    p = pointwise_preference([1, 2, 3])
    assert frontier(p, 0b111, 2).method == "pairwise"
    with pytest.raises(ValueError):
        frontier(p, 0b111, 2, method="complete")
    with pytest.raises(ValueError):
        frontier(additive_preference([1, 2]), 0b11, 1, method="bogus")


@pytest.mark.parametrize("seed", range(12))
def test_frontier_matches_oracle(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 7)
    kind = seed % 3
    if kind == 0:
        p = pareto_preference(n, rng)
    elif kind == 1:
        p = random_score_preference(n, rng)
    else:
        p = families.make(rng.choice(families.CERTIFIED), n, 3, rng)
    for S in range(1 << n):
        for q in (1, 2, 3):
            got = sorted(frontier(p, S, q).members)
            assert got == oracles.frontier(p, S, q)
            if p.is_complete:
                assert got == sorted(frontier(p, S, q, method="pairwise").members)


@pytest.mark.parametrize("family", [f for f in families.CERTIFIED if f != "pointwise"])
def test_fast_scan_and_pairwise_filter_agree(family):
    rng = random.Random(family)
    p = families.make(family, 7, 3, rng)
    assert p.is_complete
    for S in range(1 << 7):
        a = frontier(p, S, 3, method="complete").members
        b = frontier(p, S, 3, method="pairwise").members
        assert a == b


# structural properties against the literal oracles --------------------------


def _pairs(rep):
    return sorted(tuple(sorted((v["S"], v["S2"]))) for v in rep.violations)


def _triples(rep):
    return sorted((v["S"], v["S2"], v["s"]) for v in rep.violations)


@pytest.mark.parametrize("seed", range(16))
def test_checkers_match_oracles(seed):
    rng = random.Random(100 + seed)
    n = rng.randint(3, 6)
    q = rng.randint(1, min(3, n))
    p = pareto_preference(n, rng) if seed % 2 else random_score_preference(n, rng)
    g = GroundSet(n)
    ub = check_upper_bound_property(p, g, q, max_reports=BIG)
    mx = check_maximizer_property(p, g, q, max_reports=BIG)
    im = check_improvement_property(p, g, q, max_reports=BIG)
    assert _pairs(ub) == sorted(tuple(sorted(x)) for x in oracles.upper_bound_violations(p, n, q))
    assert _pairs(mx) == sorted(tuple(sorted(x)) for x in oracles.maximizer_violations(p, n, q))
    assert _triples(im) == sorted(oracles.improvement_violations(p, n, q))


def test_witness_cap_keeps_total():
    p = FunctionPreference(lambda a, b: X)
    rep = check_upper_bound_property(p, GroundSet(5), 2, max_reports=3)
    assert len(rep.violations) == 3
    assert rep.total_violations == comb(10, 2)


def test_upper_bound_vacuous_for_complete_preferences():
    rep = check_upper_bound_property(additive_preference([1, 2, 3, 4]), GroundSet(4), 2)
    assert rep.ok and rep.vacuous


def test_upper_bound_planted_failure():
    rep = check_upper_bound_property(FunctionPreference(lambda a, b: X), GroundSet(4), 2)
    assert not rep.ok


def test_maximizer_planted_failure():
    top = {0b0011, 0b1100}
    p = FunctionPreference(lambda a, b: compare_values(int(a in top), int(b in top)), is_complete=True)
    rep = check_maximizer_property(p, GroundSet(4), 2)
    assert _pairs(rep) == [(0b0011, 0b1100)]


def test_floors_ceilings_properties(fc):
    p = fc.dichotomous
    ub = check_upper_bound_property(p, fc.ground, 3)
    mx = check_maximizer_property(p, fc.ground, 3)
    im = check_improvement_property(p, fc.ground, 3)
    assert ub.ok and ub.vacuous
    assert mx.ok and not mx.vacuous
    assert not im.ok
    # S = {s1,s4,s5} is optimal in S | {s1,s2,s3} and needs s4, yet s4 cannot
    # improve {s1,s2,s3} by a single swap
    assert {"S": fc.m("s1", "s4", "s5"), "S2": fc.m("s1", "s2", "s3"), "s": 3} in im.violations
    soft = certify(fc.soft, fc.ground, 3)
    assert soft.supports_path_independence


@pytest.mark.parametrize("family", families.CERTIFIED)
def test_certified_families_pass_everything(family):
    rng = random.Random(family)
    for _ in range(4):
        n = rng.randint(2, 6)
        q = rng.randint(1, min(3, n))
        p = families.make(family, n, q, rng)
        cert = certify(p, GroundSet(n), q)
        assert cert.supports_path_independence, (family, n, q)


def test_certify_is_vacuous_above_ground_size():
    cert = certify(additive_preference([1, 2]), GroundSet(2), 3)
    assert cert.supports_path_independence
    assert all(r.vacuous for r in (cert.upper_bound, cert.maximizer, cert.improvement))


def test_relation_table_limits():
    with pytest.raises(BudgetExceeded):
        RelationTable.build(indifferent_preference(21), GroundSet(21), 1)
    with pytest.raises(BudgetExceeded):
        RelationTable.build(indifferent_preference(12), GroundSet(12), 6, max_subsets=100)


# consequences of the properties --------------------------------------------


@pytest.mark.parametrize("family", families.CERTIFIED)
def test_frontier_members_indifferent_and_strictly_on_top(family):
    rng = random.Random(family + "bases")
    n, q = 6, 3
    p = families.make(family, n, q, rng)
    assert check_upper_bound_property(p, GroundSet(n), q).ok
    for S in range(1 << n):
        F = frontier(p, S, q).members
        assert F
        for a in F:
            assert all(p.compare(a, b) is I for b in F)
            for c in oracles.nw(S, q):
                if c not in F:
                    assert p.compare(a, c) is B


@pytest.mark.parametrize("family", families.CERTIFIED)
def test_frontier_is_a_matroid_base_family(family):
    rng = random.Random(family + "bases")
    n = 6
    for q in (2, 3):
        p = families.make(family, n, q, rng)
        for S in range(1, 1 << n):
            assert check_base_axioms(frontier(p, S, q).members).ok


def test_relation_dtype():
    t = RelationTable.build(additive_preference([1, 2, 3]), GroundSet(3), 2)
    assert t.geq.dtype == np.bool_ and t.lookup.shape == (8,)

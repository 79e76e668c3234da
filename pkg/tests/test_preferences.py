import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from distpref.core import Comparison, GroundSet, SizeMismatch, transitivity_check
from distpref.frontier import frontier
from distpref.preferences import (
    Bounds,
    DiversityIndex,
    TypeAssignment,
    additive_preference,
    check_q_ordinal_concavity,
    count_vectors,
    dichotomous_bounds_preference,
    diversity_preference,
    indifferent_preference,
    pointwise_preference,
    same_frontier_check,
    satisfies_bounds,
    soft_bounds_preference,
)

import families

B, W, I, X = Comparison.BETTER, Comparison.WORSE, Comparison.INDIFFERENT, Comparison.INCOMPARABLE


# additive / pointwise ------------------------------------------------------


def test_additive_zero_is_total_indifference():
    p = indifferent_preference(4)
    for a, b in itertools.product(range(16), repeat=2):
        assert p.compare(a, b) is I


def test_additive_exam_scores():
    p = additive_preference([3, 1, 4, 1, 5])
    assert p.compare(0b00101, 0b01010) is B
    assert p.compare(0b01010, 0b00101) is W


def test_additive_rational_ties_are_exact():
    p = additive_preference([Fraction(1, 3), Fraction(1, 6), Fraction(1, 6)])
    assert p.compare(0b001, 0b110) is I
    f = additive_preference([0.1, 0.2, 0.3])
    assert f.compare(0b011, 0b100) is I


def test_additive_reproduces_soft_bounds_on_floors_ceilings_instance(fc):
    # below the floor each missing type-t student costs q + 1 = 4; the
    # ceilings can never bind, so the soft error is additive in type t
    soft = fc.soft
    add = additive_preference([0, 0, 0, 4, 4])
    for k in range(6):
        for a, b in itertools.product(fc.ground.subsets(k), repeat=2):
            assert soft.compare(a, b) is add.compare(a, b)


def test_pointwise_examples():
    assert pointwise_preference([3, 1, 4, 1]).compare(0b0101, 0b1010) is B
    assert pointwise_preference([5, 1, 4, 2]).compare(0b0011, 0b1100) is X
    p = pointwise_preference([5, 1, 4, 2])
    assert p.compare(0b0011, 0b0011) is I
    with pytest.raises(SizeMismatch):
        p.compare(0b1, 0b11)


@settings(max_examples=200)
@given(st.lists(st.integers(-3, 3), min_size=2, max_size=7), st.data())
def test_pointwise_strict_implies_additive_strict(vals, data):
    n = len(vals)
    k = data.draw(st.integers(1, n))
    a = data.draw(st.sampled_from(GroundSet(n).subsets(k)))
    b = data.draw(st.sampled_from(GroundSet(n).subsets(k)))
    if pointwise_preference(vals).compare(a, b) is B:
        assert additive_preference(vals).compare(a, b) is B


def test_pointwise_converse_fails_somewhere():
    vals = [6, 1, 4, 2]
    assert additive_preference(vals).compare(0b0011, 0b1100) is B
    assert pointwise_preference(vals).compare(0b0011, 0b1100) is X


@pytest.mark.parametrize("seed", range(6))
def test_same_frontier_exhaustive(seed):
    rng = random.Random(seed)
    n = rng.randint(3, 8)
    vals = [rng.randint(0, 3) for _ in range(n)]
    for q in (1, 2, 3):
        rep = same_frontier_check(GroundSet(n), vals, q)
        assert rep.ok and rep.checked == 2**n


def test_same_frontier_injective_values_give_top_set():
    vals = [7, 2, 9, 4, 1]
    g = GroundSet(5)
    for p in (additive_preference(vals), pointwise_preference(vals)):
        assert frontier(p, g.full, 2).members == [0b00101]


def test_same_frontier_constant_values_give_everything():
    g = GroundSet(5)
    for p in (additive_preference([2] * 5), pointwise_preference([2] * 5)):
        assert sorted(frontier(p, g.full, 2).members) == g.subsets(2)


def test_same_frontier_sampled_beyond_twelve():
    rep = same_frontier_check(GroundSet(14), list(range(14)), 3, samples=50)
    assert rep.ok and rep.checked == 50


# bounds --------------------------------------------------------------------


def test_bounds_reject_floor_above_ceiling():
    with pytest.raises(ValueError, match="r_t <= p_t"):
        Bounds((3,), (1,))


def test_satisfies_bounds(fc):
    assert satisfies_bounds(fc.m("s1", "s4", "s5"), fc.tau, fc.bounds)
    assert not satisfies_bounds(fc.m("s1", "s2", "s3"), fc.tau, fc.bounds)
    assert satisfies_bounds(0, TypeAssignment((0, 1), 2), Bounds((0, 0), (1, 1)))


def test_dichotomous_examples(fc):
    p = fc.dichotomous
    assert p.compare(fc.m("s1", "s4", "s5"), fc.m("s2", "s4", "s5")) is I
    assert p.compare(fc.m("s1", "s2", "s3"), fc.m("s1", "s2", "s4")) is I
    assert p.compare(fc.m("s3", "s4", "s5"), fc.m("s1", "s2", "s3")) is B


def test_dichotomous_has_two_classes(fc):
    sets = fc.ground.subsets(3)
    sc, _ = fc.dichotomous.scores(__import__("numpy").array(sets))
    assert sorted(set(sc.tolist())) == [0, 1]


def test_soft_examples(fc):
    p = fc.soft
    assert p.penalty == 4
    assert p.compare(fc.m("s1", "s4", "s5"), fc.m("s2", "s4", "s5")) is I
    assert p.compare(fc.m("s1", "s2", "s4"), fc.m("s1", "s2", "s3")) is B
    assert p.error(fc.m("s1", "s2", "s4")) == -4
    assert p.error(fc.m("s1", "s2", "s3")) == -8
    assert p.compare(fc.m("s1", "s4", "s5"), fc.m("s1", "s2", "s4")) is B
    assert soft_bounds_preference(fc.tau, fc.bounds, 3, penalty=10).error(fc.m("s1", "s2", "s3")) == -20


@pytest.mark.parametrize("seed", range(10))
def test_soft_refines_dichotomous(seed):
    rng = random.Random(seed)
    n, k, q = 6, rng.randint(1, 3), rng.randint(1, 4)
    tau = families.random_type_assignment(n, k, rng)
    bounds = families.random_bounds(k, q, rng)
    soft = soft_bounds_preference(tau, bounds, q)
    for a in GroundSet(n).subsets(q):
        for b in GroundSet(n).subsets(q):
            c = soft.compare(a, b)
            if c is I:
                assert soft.error(a) == soft.error(b)
            if satisfies_bounds(a, tau, bounds):
                assert c in (B, I)


# diversity -----------------------------------------------------------------


def test_log_diversity_prefers_balance():
    tau = TypeAssignment((0, 0, 1, 1), 2)
    p = diversity_preference(tau, DiversityIndex.log(2))
    assert p.compare(0b0101, 0b0011) is B
    assert 2 * math.log(2) > math.log(3)


def test_constant_index_is_indifferent():
    tau = TypeAssignment((0, 1, 1, 0), 2)
    p = diversity_preference(tau, DiversityIndex(lambda xi: 1.0, 2))
    assert all(p.compare(a, b) is I for a in GroundSet(4).subsets(2) for b in GroundSet(4).subsets(2))
    with pytest.raises(SizeMismatch):
        p.compare(0b1, 0b11)


def test_linear_index_matches_additive():
    tau = TypeAssignment((0, 1, 2, 1, 0, 2), 3)
    coefs = (Fraction(1, 2), 3, -1)
    div = diversity_preference(tau, DiversityIndex.linear(coefs, 3))
    add = additive_preference([coefs[t] for t in tau.tau])
    for a in GroundSet(6).subsets(3):
        for b in GroundSet(6).subsets(3):
            assert div.compare(a, b) is add.compare(a, b)


def test_table_index():
    idx = DiversityIndex.table({(2, 0): 0, (1, 1): 5, (0, 2): 1}, 2)
    tau = TypeAssignment((0, 0, 1, 1), 2)
    p = diversity_preference(tau, idx)
    assert p.compare(0b1100, 0b0011) is B
    with pytest.raises(KeyError):
        idx((3, 0))


def test_count_vectors():
    assert list(count_vectors(2, 2)) == [(2, 0), (1, 1), (0, 2)]
    assert len(list(count_vectors(3, 4))) == math.comb(6, 2)


def test_q_ordinal_concavity_log():
    rep = check_q_ordinal_concavity(DiversityIndex.log(4), 3, 4)
    assert rep.ok and rep.premises > 0


@pytest.mark.parametrize("coefs", [(1, 1), (2, -1), (0, 3, 1), (Fraction(1, 3), Fraction(2, 3), 0)])
def test_q_ordinal_concavity_linear(coefs):
    k = len(coefs)
    for q in range(1, 5):
        assert check_q_ordinal_concavity(DiversityIndex.linear(coefs, q), k, q).ok


def test_q_ordinal_concavity_of_max():
    # hand enumeration over {(2,0), (1,1), (0,2)}: moving the extremes toward
    # each other passes through (1,1), which is worse on both sides
    rep = check_q_ordinal_concavity(DiversityIndex(lambda xi: max(xi), 2), 2, 2)
    got = {(v["xi"], v["xi_tilde"], v["i"]) for v in rep.violations}
    assert got == {((2, 0), (0, 2), 0), ((0, 2), (2, 0), 1)}


# all families ----------------------------------------------------------------


ALL = families.CERTIFIED + ("additive-rational", "weighted-log-diversity")


@pytest.mark.parametrize("family", ALL)
def test_families_are_transitive(family):
    rng = random.Random(family)
    for trial in range(3):
        n = 6
        q = rng.randint(1, 3)
        p = families.make(family, n, q, rng)
        for size in ((q,) if p.equal_size_only else (1, 2, 3)):
            rep = transitivity_check(p, GroundSet(n), size)
            assert rep.ok, rep.violations[:3]


def test_dichotomous_is_transitive(fc):
    for size in (2, 3):
        assert transitivity_check(fc.dichotomous, fc.ground, size).ok


@pytest.mark.parametrize("family", ALL)
def test_relation_agrees_with_compare(family):
    import numpy as np

    rng = random.Random(family + "rel")
    n, q = 6, 3
    p = families.make(family, n, q, rng)
    sets = GroundSet(n).subsets(q)
    geq = p.relation(np.array(sets, dtype=np.int64))
    for i, a in enumerate(sets):
        for j, b in enumerate(sets):
            assert geq[i, j] == p.compare(a, b).weakly_better

"""Tests for decisive ordering, product homogenization, and separation."""

import hashlib
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from creaturelab.atomic import (
    decisive_order,
    disjoint_successors,
    homogenize_product,
    subset_log_family,
    toy_witness_pair,
)
from creaturelab.errors import CapacityExceeded, NotDecisive
from creaturelab.logreal import lr_from_rational

LR = lr_from_rational


def seeded_function(seed, range_size=2):
    """Deterministic pseudo-random function on creature-point tuples."""

    def F(pt):
        digest = hashlib.sha256(f"{seed}:{pt}".encode()).digest()
        return digest[0] % range_size

    return F


def test_decisive_order_picks_the_cheap_coordinate_first():
    ps, ws = toy_witness_pair()
    order, new_ws = decisive_order(ps, ws, Fraction(1, 4))
    assert order == [0, 1]  # the 8-point ladder commits to 3 points
    assert ps[0].val_size(new_ws[0]) == 3
    # the lead coordinate actually shrank; the other stayed big
    assert ps[0].in_succ(new_ws[0], ws[0])
    assert ps[1].in_succ(new_ws[1], ws[1])
    for p, w0, w1 in zip(ps, ws, new_ws):
        assert p.nor(w1) >= p.nor(w0) - LR(Fraction(1, 4))


def test_decisive_order_needs_hereditary_bigness():
    p = subset_log_family(8)
    w = tuple(range(8))
    # the second coordinate must survive a 2^7-way split, but splitting the
    # log family into singletons kills the norm outright
    with pytest.raises(NotDecisive):
        decisive_order([p, p], [w, w], Fraction(1, 4))


def test_homogenize_constant_function():
    ps, ws = toy_witness_pair()
    cur, value, report = homogenize_product(ps, ws, lambda pt: 1, 2)
    assert value == 1


def test_homogenize_range_capacity():
    ps, ws = toy_witness_pair()
    with pytest.raises(CapacityExceeded):
        homogenize_product(ps, ws, lambda pt: 0, 5)  # 5 > 2^2


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**9))
def test_homogenize_seeded_functions(seed):
    ps, ws = toy_witness_pair()
    F = seeded_function(seed)
    cur, value, report = homogenize_product(ps, ws, F, 2)
    # constancy on the full final product
    import itertools

    grids = [sorted(p.val(w)) for p, w in zip(ps, cur)]
    assert all(F(pt) == value for pt in itertools.product(*grids))
    # each coordinate lost at most half a norm unit, exactly accounted
    for p, w0, w1, row in zip(ps, ws, cur, report):
        assert p.in_succ(w1, w0)
        assert row["loss"] == p.nor(w0) - p.nor(w1)
        assert row["loss"] <= LR(Fraction(1, 2))


def test_disjoint_successors_shapes():
    p = subset_log_family(8)
    # generic overlap
    v1, v2 = disjoint_successors(p, (0, 1, 2, 3, 4, 5), (3, 4, 5, 6, 7), 1)
    assert p.val(v1).isdisjoint(p.val(v2))
    assert p.nor(v1) >= p.nor((0, 1, 2, 3, 4, 5)) - LR(1)
    assert p.nor(v2) >= p.nor((3, 4, 5, 6, 7)) - LR(1)
    # already disjoint: untouched
    assert disjoint_successors(p, (0, 1), (6, 7), Fraction(1, 2)) == ((0, 1), (6, 7))
    # w2 is a single point inside w1: w1 steps around it
    v1, v2 = disjoint_successors(p, (0, 1, 2, 3), (3,), 1)
    assert p.val(v1).isdisjoint(p.val(v2))
    assert v2 == (3,)


def test_disjoint_successors_refuses_impossible_budgets():
    p = subset_log_family(8)
    with pytest.raises(NotDecisive):
        # identical creatures, budget too small to give up half the points
        disjoint_successors(p, (0, 1), (0, 1), Fraction(1, 4))

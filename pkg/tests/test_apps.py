import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mkkm.apps import (CakeInstance, CaratheodoryInstance, HypothesisError, cake_solve, caratheodory_solve,
                       envy_gap, gale_cover, gale_solve, hypothesis_violation)
from mkkm.cover import Density
from mkkm.matroid import linear, partition, uniform
from mkkm.solver import verify_witness
from generators import random_planar_instance
from oracles import envy_free_cuts, hull_weights, independent_triples_with_origin, value

UNIFORM = [{"from": "0", "to": "1", "value": "1"}]
EARLY = [{"from": "0", "to": "1/4", "value": "4"}]


def density(items):
    return Density.from_json(items)


def oracle_envy(inst, alloc):
    """Envy at the returned cut, integrated independently."""
    bounds = [Fraction(0)] + [Fraction(str(c)) for c in alloc.cut_points] + [Fraction(1)]
    worst = Fraction(0)
    for g, i in alloc.assignment:
        vals = [value(inst.guests[g].segments, a, b) for a, b in zip(bounds, bounds[1:])]
        worst = max(worst, max(vals) - vals[i])
    return worst


def check_allocation(inst, alloc, delta):
    pieces = [i for _, i in alloc.assignment]
    guests = [g for g, _ in alloc.assignment]
    assert len(set(pieces)) == len(pieces) == inst.pieces
    assert inst.matroid.is_basis(guests)
    assert sum(alloc.lengths) == 1 and all(x >= 0 for x in alloc.lengths)
    assert alloc.envy_gap == oracle_envy(inst, alloc) >= 0
    assert alloc.envy_gap <= alloc.envy_bound
    if alloc.witness is not None:
        assert verify_witness(alloc.witness, inst.cover()) == []


def test_cake_two_uniform_guests():
    inst = CakeInstance([density(UNIFORM)] * 2, 2, uniform(2, 2))
    alloc = cake_solve(inst, Fraction(1, 64))
    check_allocation(inst, alloc, Fraction(1, 64))
    assert abs(alloc.cut_points[0] - Fraction(1, 2)) <= Fraction(1, 64)
    assert alloc.envy_gap <= Fraction(1, 64)


def test_cake_three_guests_brute_force():
    inst = CakeInstance([density(UNIFORM), density(UNIFORM), density(EARLY)], 2, uniform(3, 2))
    alloc = cake_solve(inst, Fraction(1, 64))
    check_allocation(inst, alloc, Fraction(1, 64))
    (g1, p1), (g2, _) = alloc.assignment
    cuts = envy_free_cuts(inst.guests[g1].segments, inst.guests[g2].segments, grid=1000)
    near = [t for t, piece in cuts if piece == p1 and abs(t - alloc.cut_points[0]) <= alloc.witness.diameter_bound]
    assert near


def test_cake_single_piece():
    inst = CakeInstance([density(UNIFORM)] * 2, 1, uniform(2, 1))
    alloc = cake_solve(inst)
    assert alloc.cut_points == () and alloc.envy_gap == 0 and alloc.assignment == ((0, 0),)


def test_cake_three_pieces_bound():
    guests = [density(UNIFORM), density(EARLY), density([{"from": "1/2", "to": "1", "value": "2"}]),
              density([{"from": "0", "to": "1", "value": "0", "value_to": "2"}])]
    inst = CakeInstance(guests, 3, uniform(4, 3))
    alloc = cake_solve(inst, Fraction(1, 16))
    check_allocation(inst, alloc, Fraction(1, 16))


def test_cake_instance_errors():
    with pytest.raises(ValueError):
        CakeInstance([density(UNIFORM)] * 2, 2, uniform(3, 2))
    with pytest.raises(ValueError):
        CakeInstance([density(UNIFORM)] * 2, 2, uniform(2, 1))


@settings(max_examples=8, deadline=None)
@given(st.lists(st.lists(st.integers(0, 4), min_size=1, max_size=3).filter(any), min_size=2, max_size=3))
def test_cake_random_two_piece_instances(profiles):
    guests = []
    for prof in profiles:
        n = len(prof)
        guests.append(Density.build([(Fraction(i, n), Fraction(i + 1, n), v, v) for i, v in enumerate(prof)]))
    inst = CakeInstance(guests, 2, uniform(len(guests), 2))
    alloc = cake_solve(inst, Fraction(1, 32))
    check_allocation(inst, alloc, Fraction(1, 32))
    L = max(g.max_value() for g in guests)
    assert alloc.envy_gap <= 2 * L * alloc.witness.diameter_bound  # k L delta for k = 2
    (g1, p1), (g2, _) = alloc.assignment
    tol = 2 * L / 500
    cuts = envy_free_cuts(guests[g1].segments, guests[g2].segments, grid=500, tol=tol)
    assert any(piece == p1 and abs(t - alloc.cut_points[0]) <= alloc.witness.diameter_bound + Fraction(1, 500)
               for t, piece in cuts)


# colorful Caratheodory -----------------------------------------------------------------------

def check_result(inst, res):
    M = inst.matroid
    assert M.is_independent(res.independent)
    pts = [inst.points[i] for i in res.independent]
    assert res.certificate.is_valid_for(pts, (0, 0))


def test_caratheodory_free_triangle_violates_hypothesis():
    inst = CaratheodoryInstance([(1, 0), (-1, 1), (-1, -1)], uniform(3, 3))
    assert hypothesis_violation(inst) == [2]  # V minus the flat {0, 1}
    with pytest.raises(HypothesisError):
        caratheodory_solve(inst)
    # the conclusion itself holds, with the exact weights (1/2, 1/4, 1/4)
    assert hull_weights(inst.points, (0, 0)) == {0: Fraction(1, 2), 1: Fraction(1, 4), 2: Fraction(1, 4)}


def test_caratheodory_cross_best_effort():
    inst = CaratheodoryInstance([(1, 0), (-1, 0), (0, 1), (0, -1)], uniform(4, 3))
    assert hypothesis_violation(inst) is not None
    res = caratheodory_solve(inst, check_hypothesis=False)
    check_result(inst, res)
    assert any(set(res.independent) >= set(t)
               for t in independent_triples_with_origin(inst.points, inst.matroid.rank))


def test_caratheodory_right_half_plane():
    inst = CaratheodoryInstance([(1, 0), (2, 1), (1, -3)], uniform(3, 3))
    assert hypothesis_violation(inst) is not None
    with pytest.raises(HypothesisError):
        caratheodory_solve(inst)
    assert independent_triples_with_origin(inst.points, inst.matroid.rank) == []


def test_caratheodory_origin_among_points():
    inst = CaratheodoryInstance([(0, 0), (1, 0), (-1, 1), (-1, -1)], uniform(4, 3))
    res = caratheodory_solve(inst, check_hypothesis=False)
    assert res.trivial and res.independent == (0,)


def test_caratheodory_colorful_partition():
    pts = [(1, 0), (-1, 1), (-1, -1), (2, 1), (-2, 1), (0, -3), (3, -1), (-1, 2), (-1, -2)]
    inst = CaratheodoryInstance(pts, partition([[0, 1, 2], [3, 4, 5], [6, 7, 8]]))
    assert hypothesis_violation(inst) is None
    res = caratheodory_solve(inst)
    check_result(inst, res)
    assert len({i // 3 for i in res.independent}) == len(res.independent)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_caratheodory_random(seed):
    inst = random_planar_instance(random.Random(seed))
    res = caratheodory_solve(inst)
    check_result(inst, res)
    assert independent_triples_with_origin(inst.points, inst.matroid.rank)


def test_hypothesis_check_matches_brute_force():
    rng = random.Random(7)
    for _ in range(30):
        n = rng.randint(3, 5)
        pts = [(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(n)]
        if (0, 0) in pts:
            continue
        M = linear([tuple(rng.randint(-1, 1) for _ in range(3)) for _ in range(n)])
        inst = CaratheodoryInstance(pts, M)
        expect_ok = True
        for mask in range(1 << n):
            G = [i for i in range(n) if mask >> i & 1]
            rest = [i for i in range(n) if not mask >> i & 1]
            if M.rank(rest) <= 2 and (not G or hull_weights([pts[i] for i in G], (0, 0)) is None):
                expect_ok = False
                break
        assert (hypothesis_violation(inst) is None) == expect_ok


# Gale's colorful KKM -------------------------------------------------------------------------

def colorful_grid_points(intervals, perm, grid=10 ** 4):
    """Grid values of x1 lying in A^1_{perm[0]} and A^2_{perm[1]}."""
    out = []
    for i in range(grid + 1):
        t = Fraction(i, grid)
        ok = True
        for j, vertex in enumerate(perm):
            a, b = (Fraction(s) for s in intervals[j])
            ok &= (t >= a) if vertex == 0 else (t <= b)
        if ok:
            out.append(t)
    return out


def test_gale_two_covers():
    intervals = [("1/4", "3/4"), ("1/3", "2/5")]
    choice, wit = gale_solve(intervals)
    assert sorted(choice.values()) == [0, 1]
    x = wit.center()[0]
    pts = colorful_grid_points(intervals, (choice[0], choice[1]), grid=1000)
    assert any(abs(t - x) <= wit.diameter_bound for t in pts)
    assert verify_witness(wit, gale_cover(intervals)) == []

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mkkm.cover import (CakeCover, CaratheodoryCover, CoverError, Density, Halfspace, NoLabel, Region, build_special,
                        choose_label, kkm_vertex, validate_mkomiya)
from mkkm.geometry import NotInPolytope, regular_polygon, simplex
from mkkm.matroid import truncate, uniform
from mkkm.rational import Q
from mkkm.worked_example import rhombus_cover
from generators import POLYTOPES, make_polytope, random_cover, random_matroid

HALF = Fraction(1, 2)


def interval_cover(M, a=HALF, b=HALF):
    """A[w, v1] = {x1 >= a}, A[w, v2] = {x1 <= b} for every element w."""
    sets = {}
    for w in M.ground:
        sets[(w, 0)] = Region.halfspaces([Halfspace((1, 0), a)])
        sets[(w, 1)] = Region.halfspaces([Halfspace((-1, 0), -b)])
    return kkm_vertex(M, simplex(2), sets)


def test_member_examples():
    C = interval_cover(uniform(2, 2))
    P = C.polytope
    x = (HALF, HALF)
    assert C.member(0, P.vertex_face(0).id, x) and C.member(0, P.vertex_face(1).id, x)
    assert not C.member(0, P.full_face.id, x)
    with pytest.raises(NotInPolytope):
        C.member(0, 0, (2, -1))


def test_caratheodory_member_and_point():
    P = regular_polygon(16)
    C = CaratheodoryCover(truncate(uniform(4, 4), 3), P, [(3, 1), (-1, 2), (-1, -2), (0, -1)])
    hit_faces = [f.id for f in P.faces if f.id != P.full_face.id and C.meets_ray(0, f.id)]
    assert [sorted(P.faces[f].vertex_ids) for f in hit_faces] == [[0, 1]]
    sigma = hit_faces[0]
    y = C.y_point(0, sigma)
    assert P.in_face(y, sigma) and y[0] * 1 == y[1] * 3 and y[0] > 0
    assert C.member(0, sigma, (Q("1/2"), Q("-1/2")))  # <x, v> = 1 >= 0
    assert not C.member(0, sigma, (Q("-1/2"), 0))
    other = P.vertex_face(8).id  # the vertex at (-1, 0) misses the ray: A = sigma itself
    assert C.member(0, other, P.vertices[8]) and not C.member(0, other, (0, 0))
    assert not C.member(0, P.full_face.id, (0, 0))


def test_choose_label_rhombus_setup_and_third_iteration():
    C = rhombus_cover()
    P, M = C.polytope, C.matroid
    x = (0, 0)  # barycenter of the edge {a, b}
    assert choose_label(C, x, P.supp(x), M.closure({0}).elements).w == 2
    x = (0, Q("-3/2"))  # barycenter of {b_F1, d}
    G = M.closure({0, 2}).elements
    assert G == {0, 1, 2}
    assert choose_label(C, x, P.supp(x), G).w == 3


def test_choose_label_tie_break_and_no_label():
    C = interval_cover(uniform(2, 2))
    x = (HALF, HALF)
    choice = choose_label(C, x, C.polytope.supp(x))
    assert (choice.w, choice.tau) == (0, C.polytope.vertex_face(0).id)
    assert choose_label(C, x, forbidden={0}).w == 1
    with pytest.raises(NoLabel):
        choose_label(C, x, forbidden={0, 1})


def test_validate_examples():
    assert validate_mkomiya(interval_cover(uniform(1, 1))).ok
    report = validate_mkomiya(interval_cover(uniform(1, 1), a=Fraction(3, 4)))
    assert not report.ok
    bad = [Q(c) for c in report.violation["sample"]]
    assert Fraction(1, 2) < bad[0] < Fraction(3, 4)
    assert report.violation["face_vertices"] == [0, 1]
    C = build_special("caratheodory", truncate(uniform(6, 6), 3), regular_polygon(16),
                      points=[(1, 0), (-1, 0), (0, 1), (0, -1), (2, 1), (-2, -1)])
    assert validate_mkomiya(C, 8).ok


def test_validate_rhombus_cover():
    C = rhombus_cover()
    assert validate_mkomiya(C, 4).ok


def test_build_special_cake_uniform_guests():
    U = Density.from_json([{"from": "0", "to": "1", "value": "1"}])
    C = build_special("cake", uniform(2, 2), simplex(2), guests=[U, U])
    for i in range(17):
        x = (Fraction(i, 16), 1 - Fraction(i, 16))
        for j in (0, 1):
            assert C.member(j, 0, x) == (x[0] >= HALF)


def test_build_special_kkm_closed_stars():
    P = simplex(3)
    sets = {}
    for i in range(3):
        hs = []
        for j in range(3):
            if j != i:
                n = [0, 0, 0]
                n[i], n[j] = 1, -1
                hs.append(Halfspace(n, 0))
        sets[(0, i)] = Region.halfspaces(hs)
    assert validate_mkomiya(build_special("kkm_vertex", uniform(1, 1), P, sets=sets), 12).ok


@pytest.mark.parametrize("build", [
    lambda: CaratheodoryCover(uniform(2, 2), regular_polygon(16), [(0, 0), (1, 0)]),
    lambda: CaratheodoryCover(uniform(2, 2), regular_polygon(3), [(1, 1), (1, 0)]),
    lambda: Density.from_json([{"from": "0", "to": "1", "value": "-1"}]),
    lambda: Density.from_json([{"from": "1/2", "to": "1/4", "value": "1"}]),
    lambda: build_special("voronoi", uniform(1, 1), simplex(2)),
])
def test_build_special_errors(build):
    with pytest.raises(CoverError):
        build()


def test_density_integration_is_exact():
    d = Density.from_json([{"from": "0", "to": "1/2", "value": "0", "value_to": "2"},
                           {"from": "1/2", "to": "1", "value": "1"}])
    assert d.value(Q(0), Q(1)) == Fraction(1)
    assert d.value(Q(0), Q("1/4")) == Fraction(1, 8)


# properties --------------------------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_choose_label_agreement_and_determinism(seed):
    rng = random.Random(seed)
    P = make_polytope(POLYTOPES[seed % len(POLYTOPES)])
    M = random_matroid(rng, P.dim + 1)
    C = random_cover(rng, M, P)
    k = M.rank_of_matroid
    for _ in range(5):
        weights = [rng.randint(0, 3) for _ in P.vertices]
        if not any(weights):
            weights[0] = 1
        x = tuple(sum(Q(w) * v[c] for w, v in zip(weights, P.vertices)) / sum(weights) for c in range(P.ambient_dim))
        G = set()
        for w in rng.sample(range(M.ground_size), M.ground_size):
            if M.rank(G | {w}) <= k - 1 and rng.random() < 0.5:
                G.add(w)
        G = M.closure(G).elements
        s = P.supp(x)
        choice = choose_label(C, x, s, G)
        assert choice.w not in G
        assert P.faces[choice.tau].vertex_ids <= s.vertex_ids
        assert C.member(choice.w, choice.tau, x)
        assert choose_label(C, x, s, G) == choice


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_generated_covers_validate(seed):
    rng = random.Random(seed)
    P = make_polytope(POLYTOPES[seed % len(POLYTOPES)])
    M = random_matroid(rng, P.dim + 1)
    assert validate_mkomiya(random_cover(rng, M, P), 4).ok


@settings(max_examples=20, deadline=None)
@given(st.lists(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=3),
                min_size=2, max_size=4), st.integers(2, 3))
def test_cake_cover_validates(profiles, k):
    guests = []
    for prof in profiles:
        n = len(prof)
        segs = [(Fraction(i, n), Fraction(i + 1, n), a, b) for i, (a, b) in enumerate(prof)]
        guests.append(Density.build(segs))
    if len(guests) < k:
        return
    C = CakeCover(uniform(len(guests), k), simplex(k), guests)
    assert validate_mkomiya(C, 6).ok

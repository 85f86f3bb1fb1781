from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from mkkm.matroid import (CIRCUIT, INDEPENDENT, MatroidError, from_spec, linear, partition, truncate,
                          uniform)
from oracles import rank_oracle

RHOMBUS_VECTORS = [(1, 1, 0), (-1, 1, 0), (0, 1, 0), (0, 0, 1)]


@pytest.fixture
def rhombus():
    return linear(RHOMBUS_VECTORS)


def test_construct_examples(rhombus):
    assert uniform(4, 2).rank({0, 1, 2}) == 2
    assert rhombus.rank({0, 1, 2, 3}) == 3
    assert truncate(uniform(5, 5), 3).rank({0, 1, 2, 3}) == 3


def test_rank_examples(rhombus):
    assert rhombus.rank({0, 2}) == 2
    assert uniform(3, 2).rank() == 0
    assert partition([[0, 1], [2, 3]]).rank({0, 1, 2}) == 2


def test_classify_examples(rhombus):
    assert rhombus.classify({0, 1, 2}) == (CIRCUIT, False)
    assert rhombus.classify({0, 2, 3}) == (INDEPENDENT, True)
    assert rhombus.classify(set()).kind == INDEPENDENT


def test_closure_examples(rhombus):
    assert rhombus.closure({0, 2}).elements == {0, 1, 2}
    assert rhombus.closure(range(4)).elements == set(range(4))
    assert uniform(4, 2).closure({0}).elements == {0}


def test_hyperplane_examples(rhombus):
    assert [sorted(h.elements) for h in uniform(4, 3).hyperplanes()] == [list(c) for c in combinations(range(4), 2)]
    got = sorted(sorted(h.elements) for h in rhombus.hyperplanes())
    assert got == [[0, 1, 2], [0, 3], [1, 3], [2, 3]]
    assert [h.elements for h in uniform(1, 1).hyperplanes()] == [frozenset()]


@pytest.mark.parametrize("build", [
    lambda: partition([[0, 1], [1, 2]]),
    lambda: partition([[0, 1], [3]]),
    lambda: uniform(0, 0),
    lambda: uniform(3, 4),
    lambda: truncate(uniform(3, 2), -1),
    lambda: linear([(1, 0), (1, 0, 0)]),
])
def test_construct_errors(build):
    with pytest.raises(MatroidError):
        build()


def test_out_of_range_element():
    with pytest.raises(MatroidError):
        uniform(3, 2).rank({3})


def test_spec_round_trip(rhombus):
    for M in (uniform(4, 2), partition([[0, 2], [1, 3]]), rhombus, truncate(rhombus, 2)):
        N = from_spec(M.spec)
        assert all(N.rank_mask(m) == M.rank_mask(m) for m in range(1 << M.ground_size))


# properties ---------------------------------------------------------------------------------

vectors = st.lists(st.lists(st.integers(-3, 3), min_size=1, max_size=4), min_size=1, max_size=6).filter(
    lambda vs: len({len(v) for v in vs}) == 1)


def matroids():
    return st.one_of(
        st.integers(1, 7).flatmap(lambda n: st.integers(0, n).map(lambda k: uniform(n, k))),
        st.lists(st.integers(1, 3), min_size=1, max_size=4).map(
            lambda sizes: partition([list(range(sum(sizes[:i]), sum(sizes[:i + 1]))) for i in range(len(sizes))])),
        vectors.map(linear),
    )


@settings(max_examples=60, deadline=None)
@given(matroids(), st.randoms(use_true_random=False))
def test_rank_axioms(M, rnd):
    n = M.ground_size
    assert M.rank_mask(0) == 0
    for _ in range(500 // 10):
        a, b = rnd.getrandbits(n), rnd.getrandbits(n)
        ra, rb = M.rank_mask(a), M.rank_mask(b)
        assert 0 <= ra <= bin(a).count("1")
        assert M.rank_mask(a | b) + M.rank_mask(a & b) <= ra + rb
        assert ra <= M.rank_mask(a | b)
        x = 1 << rnd.randrange(n)
        assert ra <= M.rank_mask(a | x) <= ra + 1


@settings(max_examples=100, deadline=None)
@given(vectors)
def test_linear_rank_matches_row_reduction(vs):
    M = linear(vs)
    for m in range(1 << len(vs)):
        subset = [i for i in range(len(vs)) if m >> i & 1]
        assert M.rank_mask(m) == rank_oracle(vs, subset)


@settings(max_examples=40, deadline=None)
@given(matroids())
def test_closure_and_circuit_consistency(M):
    n = M.ground_size
    for m in range(1 << n):
        A = {i for i in range(n) if m >> i & 1}
        cl = M.closure(A)
        assert A <= cl.elements
        assert M.closure(cl.elements).elements == cl.elements
        assert cl.rank == M.rank(A) == M.rank(cl.elements)
        if M.classify(A).kind == CIRCUIT:
            assert M.rank(A) == len(A) - 1
            assert all(M.is_independent(A - {x}) for x in A)


@settings(max_examples=40, deadline=None)
@given(matroids(), st.data())
def test_truncation_independent_sets(M, data):
    r = data.draw(st.integers(0, M.rank_of_matroid))
    T = truncate(M, r)
    n = M.ground_size
    for m in range(1 << n):
        A = [i for i in range(n) if m >> i & 1]
        assert T.is_independent(A) == (M.is_independent(A) and len(A) <= r)


@settings(max_examples=30, deadline=None)
@given(matroids().filter(lambda M: M.rank_of_matroid >= 1))
def test_hyperplanes_are_maximal_flats(M):
    k = M.rank_of_matroid
    for H in M.hyperplanes():
        assert H.rank == k - 1 == M.rank(H.elements)
        assert M.closure(H.elements).elements == H.elements
        assert all(M.rank(H.elements | {x}) == k for x in M.ground if x not in H.elements)


def test_restrict_renumbers():
    M = linear(RHOMBUS_VECTORS)
    R = M.restrict([3, 0, 2])
    assert R.rank({0, 1}) == M.rank({3, 0}) == 2
    assert R.rank({1, 2}) == 2 and R.rank({0, 1, 2}) == 3


def test_large_ground_set_cap():
    with pytest.raises(MatroidError):
        uniform(65, 2)

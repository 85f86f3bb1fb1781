"""Finite matroids given by a rank oracle.

Subsets of the ground set travel as bitmasks internally; the public methods
accept any iterable of element ids. Closure, circuits and hyperplanes are
always derived from the rank function, never stored.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from itertools import combinations
from math import lcm
from typing import Callable, Iterable, List, NamedTuple, Sequence

from .rational import Q, Rational

MAX_GROUND = 64

INDEPENDENT = "independent"
CIRCUIT = "circuit"
DEPENDENT = "dependent-noncircuit"


class MatroidError(ValueError):
    pass


@dataclass(frozen=True)
class Flat:
    elements: frozenset
    rank: int


class Classification(NamedTuple):
    kind: str
    is_basis: bool


def to_mask(elements: Iterable[int], n: int) -> int:
    mask = 0
    for e in elements:
        if not isinstance(e, int) or e < 0 or e >= n:
            raise MatroidError(f"element {e!r} outside ground set of size {n}")
        mask |= 1 << e
    return mask


def from_mask(mask: int) -> frozenset:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


class Matroid:
    """A matroid on ground set {0, ..., ground_size-1} defined by its rank function.

    ``rank_fn`` receives a bitmask. Results are memoized under a lock, so a
    Matroid can be shared between threads.
    """

    def __init__(self, ground_size: int, rank_fn: Callable[[int], int], kind: str, spec: dict | None = None):
        if ground_size <= 0:
            raise MatroidError("empty ground set")
        if ground_size > MAX_GROUND:
            raise MatroidError(f"ground sets are capped at {MAX_GROUND} elements")
        self.ground_size = ground_size
        self.kind = kind
        self.spec = spec
        self._rank_fn = rank_fn
        self._memo: dict[int, int] = {}
        self._lock = threading.Lock()
        self._full = (1 << ground_size) - 1
        self.rank_of_matroid = self.rank_mask(self._full)

    def __repr__(self) -> str:
        return f"Matroid(kind={self.kind!r}, n={self.ground_size}, rank={self.rank_of_matroid})"

    @property
    def ground(self) -> range:
        return range(self.ground_size)

    def mask(self, elements: Iterable[int]) -> int:
        return to_mask(elements, self.ground_size)

    def rank_mask(self, mask: int) -> int:
        with self._lock:
            r = self._memo.get(mask)
        if r is None:
            r = self._rank_fn(mask)
            with self._lock:
                self._memo[mask] = r
        return r

    def rank(self, elements: Iterable[int] = ()) -> int:
        return self.rank_mask(self.mask(elements))

    def is_independent(self, elements: Iterable[int]) -> bool:
        m = self.mask(elements)
        return self.rank_mask(m) == bin(m).count("1")

    def is_basis(self, elements: Iterable[int]) -> bool:
        m = self.mask(elements)
        size = bin(m).count("1")
        return size == self.rank_of_matroid and self.rank_mask(m) == size

    def is_circuit_mask(self, m: int) -> bool:
        size = bin(m).count("1")
        if size == 0 or self.rank_mask(m) != size - 1:
            return False
        rest = m
        while rest:
            low = rest & -rest
            rest ^= low
            if self.rank_mask(m ^ low) != size - 1:
                return False
        return True

    def classify(self, elements: Iterable[int]) -> Classification:
        m = self.mask(elements)
        size = bin(m).count("1")
        r = self.rank_mask(m)
        if r == size:
            return Classification(INDEPENDENT, size == self.rank_of_matroid)
        if self.is_circuit_mask(m):
            return Classification(CIRCUIT, False)
        return Classification(DEPENDENT, False)

    def closure_mask(self, m: int) -> int:
        r = self.rank_mask(m)
        out = m
        for x in range(self.ground_size):
            bit = 1 << x
            if not m & bit and self.rank_mask(m | bit) == r:
                out |= bit
        return out

    def closure(self, elements: Iterable[int]) -> Flat:
        m = self.mask(elements)
        cl = self.closure_mask(m)
        return Flat(from_mask(cl), self.rank_mask(m))

    def hyperplanes(self) -> List[Flat]:
        """All flats of rank k-1, obtained by closing independent (k-1)-sets."""
        k = self.rank_of_matroid
        if k < 1:
            raise MatroidError("hyperplanes need a matroid of rank >= 1")
        seen: dict[int, None] = {}
        for combo in combinations(range(self.ground_size), k - 1):
            m = to_mask(combo, self.ground_size)
            if self.rank_mask(m) == k - 1:
                seen.setdefault(self.closure_mask(m), None)
        flats = [Flat(from_mask(m), k - 1) for m in seen]
        flats.sort(key=lambda f: sorted(f.elements))
        return flats

    def loops(self) -> frozenset:
        return from_mask(self.closure_mask(0))

    def restrict(self, elements: Sequence[int]) -> "Matroid":
        """Restriction to ``elements``; new id i stands for ``elements[i]``."""
        elements = list(elements)
        self.mask(elements)
        outer = self

        def rank_fn(mask: int) -> int:
            return outer.rank_mask(to_mask((elements[i] for i in from_mask(mask)), outer.ground_size))

        return Matroid(len(elements), rank_fn, "restriction", None)


def uniform(n: int, k: int) -> Matroid:
    if n <= 0:
        raise MatroidError("empty ground set")
    if not 0 <= k <= n:
        raise MatroidError(f"uniform matroid needs 0 <= k <= n, got k={k}, n={n}")
    return Matroid(n, lambda m: min(bin(m).count("1"), k), "uniform", {"kind": "uniform", "n": n, "k": k})


def partition(parts: Sequence[Sequence[int]]) -> Matroid:
    """Partition matroid picking at most one element from each part."""
    parts = [list(p) for p in parts]
    flat = [e for p in parts for e in p]
    n = len(flat)
    if n == 0:
        raise MatroidError("empty ground set")
    if any(not p for p in parts):
        raise MatroidError("partition has an empty part")
    if len(set(flat)) != n:
        raise MatroidError("partition parts overlap")
    if set(flat) != set(range(n)):
        raise MatroidError(f"partition parts must cover 0..{n - 1} without gaps")
    masks = [to_mask(p, n) for p in parts]

    def rank_fn(m: int) -> int:
        return sum(1 for pm in masks if pm & m)

    return Matroid(n, rank_fn, "partition", {"kind": "partition", "parts": parts})


def _integer_rows(vectors: Sequence[Sequence[Rational]]) -> List[List[int]]:
    rows = []
    for v in vectors:
        den = lcm(*(c.denominator for c in v)) if v else 1
        rows.append([int(c * den) for c in v])
    return rows


def bareiss_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination."""
    a = [list(r) for r in rows]
    if not a:
        return 0
    m, n = len(a), len(a[0])
    prev = 1
    rank = 0
    for c in range(n):
        piv = next((i for i in range(rank, m) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][c]
        for i in range(rank + 1, m):
            for j in range(c + 1, n):
                a[i][j] = (a[i][j] * p - a[i][c] * a[rank][j]) // prev
            a[i][c] = 0
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


def linear(vectors: Sequence[Sequence]) -> Matroid:
    """Column matroid of a list of rational vectors."""
    vecs = [[Q(c) for c in v] for v in vectors]
    if not vecs:
        raise MatroidError("empty ground set")
    dim = len(vecs[0])
    if any(len(v) != dim for v in vecs):
        raise MatroidError("vectors of a linear matroid must share one dimension")
    rows = _integer_rows(vecs)

    def rank_fn(m: int) -> int:
        return bareiss_rank([rows[i] for i in sorted(from_mask(m))])

    spec = {"kind": "linear", "vectors": [[str(c) for c in v] for v in vecs]}
    return Matroid(len(vecs), rank_fn, "linear", spec)


def truncate(inner: Matroid, rank: int) -> Matroid:
    if rank < 0:
        raise MatroidError("truncation rank must be nonnegative")
    if rank > inner.rank_of_matroid:
        raise MatroidError(f"truncation rank {rank} exceeds matroid rank {inner.rank_of_matroid}")
    spec = {"kind": "truncate", "rank": rank, "inner": inner.spec} if inner.spec else None
    return Matroid(inner.ground_size, lambda m: min(inner.rank_mask(m), rank), "truncated", spec)


def from_spec(spec: dict) -> Matroid:
    """Build a matroid from its JSON fragment (see README for the schema)."""
    kind = spec.get("kind")
    if kind == "uniform":
        return uniform(int(spec["n"]), int(spec["k"]))
    if kind == "partition":
        return partition(spec["parts"])
    if kind == "linear":
        return linear(spec["vectors"])
    if kind == "truncate":
        return truncate(from_spec(spec["inner"]), int(spec["rank"]))
    raise MatroidError(f"unknown matroid kind {kind!r}")

"""Bad-face elimination and the epsilon-witness solver.

``eliminate_bad_face`` runs the queue-driven refinement: star-subdivide
the bad face, label the new barycenter outside the closure of the labels
already in play, queue the newly created bad faces by how many of their
vertices are fresh, and keep processing the highest nonempty queue.

With ``check=True`` every invariant the termination argument relies on is
asserted as the run goes (see ``InvariantViolation``).
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Deque, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .cover import CoverOracle, LabelChoice, choose_label
from .geometry import HullCertificate, conv_contains
from .matroid import Matroid, from_mask
from .rational import Point, Q, Rational, barycenter, fmt_point, sqrt_upper
from .simplicial import Triangulation, face_key, initial_triangulation, refine_global

MAX_STEPS = 10 ** 6


class InvariantViolation(AssertionError):
    """A property proven for valid inputs failed at runtime."""

    trace: list = []


class NotFound(RuntimeError):
    """No face of the triangulation has p in the hull of its designated points."""


class IterationLimit(RuntimeError):
    pass


@dataclass
class Labeling:
    lam: Dict[int, int] = field(default_factory=dict)  # vertex -> polytope face id
    f: Dict[int, int] = field(default_factory=dict)  # vertex -> ground element
    y: Dict[int, Point] = field(default_factory=dict)  # vertex -> designated point

    def copy(self) -> "Labeling":
        return Labeling(dict(self.lam), dict(self.f), dict(self.y))

    def assign(self, v: int, choice: LabelChoice, C: CoverOracle) -> None:
        self.lam[v] = choice.tau
        self.f[v] = choice.w
        self.y[v] = C.y_point(choice.w, choice.tau)


def check_labeling(T: Triangulation, L: Labeling, C: CoverOracle, vertices: Optional[Iterable[int]] = None) -> None:
    """Raise InvariantViolation unless (P1) and (P2) hold at the given vertices (default: all)."""
    P = C.polytope
    for v in (T.vertices if vertices is None else vertices):
        if v not in L.f:
            raise InvariantViolation(f"vertex {v} is unlabeled")
        lam, w, y = L.lam[v], L.f[v], L.y[v]
        x = T.coords[v]
        if not C.member(w, lam, x):
            raise InvariantViolation(f"(P1) fails at vertex {v}: not in A[{w}, face {lam}]")
        if y != C.y_point(w, lam) or not P.in_face(y, lam):
            raise InvariantViolation(f"(P2) fails at vertex {v}: designated point mismatch")
        if not P.faces[lam].vertex_ids <= P.faces[T.supp[v]].vertex_ids:
            raise InvariantViolation(f"(P2) fails at vertex {v}: label face not inside supp")


def init_labeling(T: Triangulation, C: CoverOracle) -> Labeling:
    """Label every vertex with the first admissible (w, tau); loops are never used."""
    L = Labeling()
    loops = C.matroid.loops()
    P = C.polytope
    for v in T.vertices:
        L.assign(v, choose_label(C, T.coords[v], P.faces[T.supp[v]], loops), C)
    return L


# bad faces --------------------------------------------------------------------------

class _BadTest:
    """Memoized badness, which depends only on the label mask and the face size."""

    def __init__(self, M: Matroid):
        self.M = M
        self.memo: Dict[Tuple[int, int], bool] = {}

    def by_mask(self, mask: int, size: int) -> bool:
        key = (mask, size)
        hit = self.memo.get(key)
        if hit is None:
            distinct = bin(mask).count("1")
            if size == 2 and distinct == 1:
                hit = True
            elif distinct == size:
                hit = self.M.is_circuit_mask(mask)
            else:
                hit = False
            self.memo[key] = hit
        return hit

    def __call__(self, labels: Sequence[int]) -> bool:
        mask = 0
        for w in labels:
            mask |= 1 << w
        return self.by_mask(mask, len(labels))


def is_bad(face: Iterable[int], L: Labeling, M: Matroid) -> bool:
    labels = [L.f[v] for v in face]
    return _BadTest(M)(labels)


def bad_faces(T: Triangulation, L: Labeling, M: Matroid, containing: Optional[int] = None,
              _test: Optional[_BadTest] = None) -> Set[frozenset]:
    """B(T), or B(T, v) when ``containing`` is given."""
    test = _test or _BadTest(M)
    f = L.f
    if containing is None:
        pool, fixed = T.simplices, ()
    else:
        pool, fixed = T.incident(containing), (containing,)
    out: Set[frozenset] = set()
    base = 0
    for v in fixed:
        base |= 1 << f[v]
    nfixed = len(fixed)
    by_mask = test.by_mask
    try:
        for s in pool:
            items = sorted(s.difference(fixed))
            for r in range(0 if fixed else 1, len(items) + 1):
                for c in combinations(items, r):
                    mask = base
                    for v in c:
                        mask |= 1 << f[v]
                    if by_mask(mask, r + nfixed):
                        out.add(frozenset(c + fixed))
    except KeyError as err:
        raise ValueError(f"vertex {err.args[0]} is unlabeled") from None
    return out


def _bad_faces_touching(T: Triangulation, L: Labeling, vertices: Iterable[int], test: _BadTest) -> Set[frozenset]:
    """Bad faces containing at least one of ``vertices``.

    Labels of existing vertices never change, so during an elimination these
    are exactly the bad faces that were not bad faces of the input.
    """
    out: Set[frozenset] = set()
    for v in set(vertices):
        out |= bad_faces(T, L, None, containing=v, _test=test)
    return out


# the elimination algorithm ----------------------------------------------------------------

@dataclass
class EliminationStats:
    iterations: int = 0
    setup_queue: Dict[int, List[List[int]]] = field(default_factory=dict)
    trace: List[dict] = field(default_factory=list)
    new_vertices: List[int] = field(default_factory=list)


def _mask_of(labels: Iterable[int]) -> int:
    m = 0
    for w in labels:
        m |= 1 << w
    return m


def _nonempty(Q: Dict[int, Deque[frozenset]]) -> List[int]:
    return sorted(j for j, q in Q.items() if q)


def _eliminate_inplace(T: Triangulation, L: Labeling, F1: frozenset, C: CoverOracle, test: _BadTest,
                       check: bool, record: bool, observer=None, literal_s: bool = False) -> EliminationStats:
    M, P = C.matroid, C.polytope
    k = M.rank_of_matroid
    stats = EliminationStats()

    def fail(msg: str):
        err = InvariantViolation(msg)
        err.trace = list(stats.trace)
        raise err

    def queue_new(b: int, H: Set[int], j: int, Q: Dict[int, Deque[Tuple[frozenset, int]]]) -> List[frozenset]:
        found = sorted(bad_faces(T, L, M, containing=b, _test=test), key=lambda F: tuple(sorted(F)))
        groups: Dict[int, List[frozenset]] = {}
        for F in found:
            i = len(F - H)
            if i < 1:
                fail(f"queue index floor: bad face {sorted(F)} has no vertex outside H")
            groups.setdefault(i, []).append(F)
            if check:
                for r in range(1, len(F)):
                    for sub in combinations(sorted(F), r):
                        if test([L.f[v] for v in sub]):
                            fail(f"bad face {sorted(F)} properly contains bad face {list(sub)}")
        for i, faces in sorted(groups.items()):
            if Q.get(j + i):
                fail(f"Q_{j + i} was nonempty when new faces were queued there")
            Q[j + i] = deque((F, len(S)) for F in faces)
        return found

    def check_slice(b: int, H: Set[int], j: int) -> None:
        for s in T.incident(b):
            others = len((s - {b}) & H)
            if others != j - 1:
                fail(f"H-slice: simplex {sorted(s)} through b={b} has {others} other H-vertices, expected {j - 1}")

    def check_queue_bound(Q) -> None:
        for j in _nonempty(Q):
            if j >= k + 1:
                fail(f"queue bound: Q_{j} nonempty with k={k}")

    # setup
    F1 = frozenset(F1)
    if not T.is_face(F1):
        raise ValueError(f"{sorted(F1)} is not a face")
    if not test([L.f[v] for v in F1]):
        raise ValueError(f"{sorted(F1)} is not a bad face")
    if len(F1) < 2:
        raise ValueError("a bad face needs at least two vertices (loop labels are excluded)")
    b1 = T.star_subdivide_inplace(F1)
    stats.new_vertices.append(b1)
    j = len(F1)
    f1_mask = _mask_of(L.f[v] for v in F1)
    if M.rank_mask(f1_mask) > j - 1:
        fail("rank bound (setup): labels of F1 have rank above |F1|-1")
    G = M.closure_mask(f1_mask)
    choice = choose_label(C, T.coords[b1], P.faces[T.supp[b1]], from_mask(G))
    L.assign(b1, choice, C)
    S: List[Tuple[frozenset, int]] = [(F1, b1)]
    H: Set[int] = set(F1) | {b1}
    if check:
        check_labeling(T, L, C, [b1])
        check_slice(b1, H, j)
    # Queue entries carry the length of S when they were created, so S can be
    # cut back to the chain of faces that produced them.
    Q: Dict[int, Deque[Tuple[frozenset, int]]] = {}
    queue_new(b1, H, j, Q)
    stats.setup_queue = {jj: [sorted(F) for F, _ in q] for jj, q in sorted(Q.items()) if q}
    if record:
        stats.trace.append({"step": "setup", "j": j, "face": sorted(F1), "b": b1, "w": choice.w,
                            "tau": choice.tau, "queues": dict(stats.setup_queue)})
    if check:
        check_queue_bound(Q)
    if observer is not None:
        observer("setup", T, L)
    floor = 0
    steps = 0
    while True:
        live = _nonempty(Q)
        if not live:
            break
        steps += 1
        if steps > MAX_STEPS:
            raise IterationLimit(f"elimination exceeded {MAX_STEPS} steps; queues: "
                                 f"{ {jj: len(q) for jj, q in Q.items()} }")
        j = live[-1]
        F, depth = Q[j].popleft()
        if not T.is_face(F):
            fail(f"queued face {sorted(F)} stopped being a face before it was popped")
        b = T.star_subdivide_inplace(F)
        stats.new_vertices.append(b)
        if not literal_s:
            del S[depth:]
        S.append((F, b))
        H = set()
        for Fp, bp in S:
            H |= Fp
            H.add(bp)
        if check:
            check_slice(b, H, j)
        rest_mask = _mask_of(L.f[v] for v in H if v != b)
        if M.rank_mask(rest_mask) > j - 1:
            fail(f"rank bound: r(f(H - b)) = {M.rank_mask(rest_mask)} exceeds j-1 = {j - 1}")
        G = M.closure_mask(rest_mask)
        choice = choose_label(C, T.coords[b], P.faces[T.supp[b]], from_mask(G))
        L.assign(b, choice, C)
        if check:
            check_labeling(T, L, C, [b])
        found = queue_new(b, H, j, Q)
        if not found:
            S.pop()
        stats.iterations += 1
        if record:
            stats.trace.append({"step": "iteration", "iteration": stats.iterations, "j": j, "face": sorted(F),
                                "b": b, "w": choice.w, "tau": choice.tau,
                                "new_bad": [sorted(x) for x in found],
                                "queues": {jj: [sorted(x) for x, _ in q] for jj, q in sorted(Q.items()) if q}})
        if observer is not None:
            observer("iteration", T, L)
        if check:
            check_queue_bound(Q)
            for i in range(1, floor + 1):
                if Q.get(i):
                    fail(f"queue order: Q_{i} refilled after Q_1..Q_{floor} had emptied")
            prefix = 0
            while prefix < k and not Q.get(prefix + 1):
                prefix += 1
            floor = max(floor, prefix)
            pending = {x for q in Q.values() for x, _ in q}
            for x in _bad_faces_touching(T, L, stats.new_vertices, test):
                if x not in pending:
                    fail(f"queue coverage: new bad face {sorted(x)} is not queued")
    return stats


def eliminate_bad_face(T: Triangulation, L: Labeling, F1: Iterable[int], C: CoverOracle, *,
                       check: bool = False, record: bool = False, observer=None,
                       literal_s: bool = False) -> Tuple[Triangulation, Labeling, EliminationStats]:
    """Remove the bad face F1 without creating new bad faces.

    Returns (T', L', stats). T' refines T, (P1)/(P2) hold, B(T') is a subset
    of B(T) and F1 is no longer a face. ``observer(step, T_c, L)`` is called
    after the setup and after every loop iteration.

    S is kept as the chain of faces leading to the face being processed: a
    popped face first cuts S back to the face whose barycenter created it.
    ``literal_s=True`` instead only drops a face from S when its barycenter
    creates no bad faces; that reading can break the rank bound when labeling.
    """
    T2, L2 = T.copy(), L.copy()
    test = _BadTest(C.matroid)
    stats = _eliminate_inplace(T2, L2, frozenset(F1), C, test, check, record, observer, literal_s)
    if check:
        base = bad_faces(T, L, C.matroid, _test=test)
        after = bad_faces(T2, L2, C.matroid, _test=test)
        if not after < base or T2.is_face(F1):
            raise InvariantViolation("bad faces grew: B(T') is not a proper subset of B(T)")
    return T2, L2, stats


def good_triangulation(T: Triangulation, C: CoverOracle, L: Optional[Labeling] = None, *,
                       check: bool = False, record: bool = False) -> Tuple[Triangulation, Labeling, List[EliminationStats]]:
    """Refine T until no face is bad; then every maximal simplex carries a basis."""
    M = C.matroid
    if M.rank_of_matroid < 2:
        raise ValueError("good_triangulation needs a matroid of rank k >= 2")
    if M.rank_of_matroid != C.polytope.dim + 1:
        raise ValueError("matroid rank must be the polytope dimension plus one")
    T = T.copy()
    L = init_labeling(T, C) if L is None else L.copy()
    if check:
        check_labeling(T, L, C)
    test = _BadTest(M)
    # No elimination creates bad faces, so the initial ones, smallest first,
    # are all that ever need removing; those destroyed on the way are skipped.
    heap = [(face_key(F), F) for F in bad_faces(T, L, M, _test=test)]
    heapq.heapify(heap)
    runs: List[EliminationStats] = []
    while heap:
        _, F1 = heapq.heappop(heap)
        if not T.is_face(F1):
            continue
        stats = _eliminate_inplace(T, L, F1, C, test, check, record)
        runs.append(stats)
        if check and _bad_faces_touching(T, L, stats.new_vertices, test):
            raise InvariantViolation("bad faces grew: the elimination left a new bad face behind")
        if check and T.is_face(F1):
            raise InvariantViolation("the eliminated face survived")
    if check:
        check_labeling(T, L, C)
        check_good(T, L, M)
    return T, L, runs


def check_good(T: Triangulation, L: Labeling, M: Matroid) -> None:
    """(P3): labels of every maximal simplex form a basis."""
    for s in T.simplices:
        labels = [L.f[v] for v in s]
        if len(set(labels)) != len(labels) or not M.is_basis(labels):
            raise InvariantViolation(f"(P3) fails on simplex {sorted(s)} with labels {labels}")


# Sperner-Shapley search --------------------------------------------------------------------

def sperner_shapley_face(T: Triangulation, L: Labeling, p: Sequence[Rational]) -> Tuple[frozenset, HullCertificate]:
    """First face (by dimension, then ids) whose designated points have p in their hull.

    The certificate indexes the face's vertices in increasing id order.
    """
    p = tuple(Q(c) for c in p)
    k = max((len(s) for s in T.simplices), default=0)
    # faces are keyed by the bitmask of their distinct designated points
    ids: Dict[Point, int] = {}
    bit = {v: 1 << ids.setdefault(L.y[v], len(ids)) for v in T.vertices}
    pts = list(ids)
    decided: Dict[int, bool] = {}

    def hull_hit(mask: int) -> bool:
        hit = decided.get(mask)
        if hit is None:
            hit = conv_contains([q for i, q in enumerate(pts) if mask >> i & 1], p) is not None
            decided[mask] = hit
        return hit

    for size in range(1, k + 1):
        hits = set()
        for s in T.simplices:
            for c in combinations(sorted(s), size):
                mask = 0
                for v in c:
                    mask |= bit[v]
                if hull_hit(mask):
                    hits.add(c)
        if hits:
            c = min(hits)
            return frozenset(c), conv_contains([L.y[v] for v in c], p)
    raise NotFound("no face contains p in the hull of its designated points: labeling is not Sperner-Shapley")


# epsilon witness -----------------------------------------------------------------------------

@dataclass
class Witness:
    basis: Tuple[int, ...]
    faces: Tuple[int, ...]
    simplex: Tuple[int, ...]
    certificate: Tuple[Tuple[int, Rational], ...]  # (vertex id, weight) over the found face
    diameter_bound: Rational  # rational upper bound on the triangulation diameter
    diameter_squared: Rational  # exact upper bound on the squared diameter
    point: Point
    vertex_coords: Tuple[Point, ...]
    y_points: Tuple[Point, ...]
    trace: Optional[List[dict]] = None

    def center(self) -> Point:
        return barycenter(list(self.vertex_coords))

    def to_json(self) -> dict:
        out = {
            "basis": list(self.basis),
            "faces": list(self.faces),
            "simplex": list(self.simplex),
            "certificate": [[v, str(w)] for v, w in self.certificate],
            "diameter_bound": str(self.diameter_bound),
            "diameter_squared": str(self.diameter_squared),
            "point": fmt_point(self.point),
            "vertex_coords": [fmt_point(x) for x in self.vertex_coords],
            "y_points": [fmt_point(y) for y in self.y_points],
        }
        if self.trace is not None:
            out["trace"] = self.trace
        return out

    @classmethod
    def from_json(cls, d: dict) -> "Witness":
        return cls(
            basis=tuple(d["basis"]),
            faces=tuple(d["faces"]),
            simplex=tuple(d["simplex"]),
            certificate=tuple((int(v), Q(w)) for v, w in d["certificate"]),
            diameter_bound=Q(d["diameter_bound"]),
            diameter_squared=Q(d["diameter_squared"]),
            point=tuple(Q(c) for c in d["point"]),
            vertex_coords=tuple(tuple(Q(c) for c in x) for x in d["vertex_coords"]),
            y_points=tuple(tuple(Q(c) for c in y) for y in d["y_points"]),
            trace=d.get("trace"),
        )


def verify_witness(wit: Witness, C: CoverOracle) -> List[str]:
    """Independent re-check of a witness against the cover; returns problems found."""
    problems = []
    M = C.matroid
    if not M.is_basis(wit.basis):
        problems.append("labels are not a basis")
    for w, fid, x, y in zip(wit.basis, wit.faces, wit.vertex_coords, wit.y_points):
        if not C.member(w, fid, x):
            problems.append(f"vertex {fmt_point(x)} not in A[{w}, face {fid}]")
        if y != C.y_point(w, fid):
            problems.append(f"designated point mismatch for ({w}, {fid})")
    pos = {v: i for i, v in enumerate(wit.simplex)}
    if any(v not in pos for v, _ in wit.certificate):
        problems.append("certificate uses a vertex outside the simplex")
        return problems
    weights = [w for _, w in wit.certificate]
    if any(w < 0 for w in weights) or sum(weights) != 1:
        problems.append("certificate weights are not a probability vector")
    dim = len(wit.point)
    combo = tuple(sum((w * wit.y_points[pos[v]][c] for v, w in wit.certificate), Rational(0)) for c in range(dim))
    if combo != wit.point:
        problems.append("certificate does not reproduce the point")
    d2 = max((sum((a - b) ** 2 for a, b in zip(x, z)) for x in wit.vertex_coords for z in wit.vertex_coords),
             default=Rational(0))
    if d2 > wit.diameter_squared or wit.diameter_squared > wit.diameter_bound ** 2:
        problems.append("simplex is wider than the reported diameter")
    return problems


def refine_to(T: Triangulation, delta_squared: Rational, max_rounds: int = 16) -> Triangulation:
    """Edgewise-refine until every edge has squared length at most delta_squared.

    In dimension <= 2 every edge of an edgewise subdivision is half of a
    parallel edge of its parent, so the squared diameter drops by exactly 4
    per round and need not be recomputed. Tetrahedra gain shorter diagonals
    that break this, so higher dimensions recompute.
    """
    rounds = 0
    d2 = T.diameter_squared()
    while d2 > delta_squared:
        if rounds >= max_rounds:
            raise IterationLimit(f"diameter still too large after {max_rounds} refinement rounds")
        T = refine_global(T, "edgewise")
        d2 = d2 / 4 if T.polytope.dim <= 2 else T.diameter_squared()
        rounds += 1
    return T


def default_delta_squared(P) -> Rational:
    """(diam(P) / 64)^2, exact."""
    return P.diameter_squared() / 4096


def solve(C: CoverOracle, point: Optional[Sequence] = None, delta=None, *, delta_squared=None,
          check: bool = False, record: bool = False) -> Witness:
    """Epsilon-witness for the matroid-colorful covering theorem.

    Refines the barycentric triangulation of the polytope until its diameter
    is at most ``delta``, removes every bad face, and searches for a face whose
    designated points have ``point`` in their hull. The bound can be passed
    squared instead, which keeps irrational deltas exact. Defaults: the
    vertex barycenter of the polytope and delta = diam(P)/64.
    """
    P, M = C.polytope, C.matroid
    k = M.rank_of_matroid
    if k != P.dim + 1:
        raise ValueError(f"matroid rank {k} must equal dim(P)+1 = {P.dim + 1}")
    p = barycenter(list(P.vertices)) if point is None else tuple(Q(c) for c in point)
    if len(p) != P.ambient_dim or not P.contains(p):
        raise ValueError("the target point must lie in the polytope")
    if delta is not None and delta_squared is not None:
        raise ValueError("pass delta or delta_squared, not both")
    if delta is not None:
        delta = Q(delta)
        if delta <= 0:
            raise ValueError("delta must be positive")
        delta_squared = delta * delta
    elif delta_squared is None:
        delta_squared = default_delta_squared(P) or Rational(1)  # a single point has diameter 0
    delta_squared = Q(delta_squared)
    if delta_squared <= 0:
        raise ValueError("delta must be positive")

    if k == 1:
        choice = choose_label(C, p, P.supp(p), M.loops())
        return Witness((choice.w,), (choice.tau,), (0,), ((0, Rational(1)),), Rational(0), Rational(0), p, (p,),
                       (C.y_point(choice.w, choice.tau),), [] if record else None)

    T = refine_to(initial_triangulation(P), delta_squared)
    # Star subdivisions never lengthen edges: a barycenter is a convex
    # combination of the vertices of every simplex it is joined to.
    d2 = T.diameter_squared()
    T, L, runs = good_triangulation(T, C, check=check, record=record)
    face, cert = sperner_shapley_face(T, L, p)
    simplex = min(T.containing(face), key=face_key)
    verts = tuple(sorted(simplex))
    fverts = sorted(face)
    certificate = tuple((fverts[i], w) for i, w in cert.coefficients)
    bound = sqrt_upper(d2)
    if delta is not None and d2 <= delta_squared:
        bound = min(bound, delta)
    trace = [ev for r in runs for ev in r.trace] if record else None
    return Witness(
        basis=tuple(L.f[v] for v in verts),
        faces=tuple(L.lam[v] for v in verts),
        simplex=verts,
        certificate=certificate,
        diameter_bound=bound,
        diameter_squared=d2,
        point=p,
        vertex_coords=tuple(T.coords[v] for v in verts),
        y_points=tuple(L.y[v] for v in verts),
        trace=trace,
    )

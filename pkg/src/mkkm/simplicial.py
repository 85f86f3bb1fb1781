"""Geometric triangulations of a polytope.

Vertex ids are append-only: subdividing never renumbers an existing vertex,
so callers can track vertices across any number of refinements. Maximal
simplices are stored as frozensets of vertex ids; a face of the
triangulation is any nonempty subset of a maximal simplex.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .geometry import Polytope
from .rational import Point, Q, Rational, barycenter, det, fmt_point, sqrt_upper, sub

SimplexFace = frozenset


class TriangulationError(ValueError):
    pass


def face_key(face: Iterable[int]) -> Tuple[int, ...]:
    """Sort key: by size, then lexicographic on sorted vertex ids."""
    t = tuple(sorted(face))
    return (len(t),) + t


class Triangulation:
    """A triangulation of ``polytope`` with exact rational vertex coordinates.

    The module-level functions (``star_subdivide``, ``refine_global``) are
    value-semantic and return new objects. The ``*_inplace`` methods exist for
    a solver that owns a private copy.
    """

    def __init__(self, polytope: Polytope, coords: Dict[int, Point], supp: Dict[int, int],
                 simplices: Iterable[Iterable[int]]):
        self.polytope = polytope
        self.coords: Dict[int, Point] = dict(coords)
        self.supp: Dict[int, int] = dict(supp)
        self.simplices: Set[frozenset] = set()
        self._incident: Dict[int, Set[frozenset]] = {v: set() for v in self.coords}
        for s in simplices:
            self._add_simplex(frozenset(s))
        self._next_id = max(self.coords, default=-1) + 1

    def copy(self) -> "Triangulation":
        t = Triangulation.__new__(Triangulation)
        t.polytope = self.polytope
        t.coords = dict(self.coords)
        t.supp = dict(self.supp)
        t.simplices = set(self.simplices)
        t._incident = {v: set(s) for v, s in self._incident.items()}
        t._next_id = self._next_id
        return t

    def __repr__(self) -> str:
        return f"Triangulation({len(self.coords)} vertices, {len(self.simplices)} simplices)"

    # structure ---------------------------------------------------------------

    def _add_simplex(self, s: frozenset) -> None:
        for v in s:
            if v not in self.coords:
                raise TriangulationError(f"simplex uses unknown vertex {v}")
        self.simplices.add(s)
        for v in s:
            self._incident[v].add(s)

    def _remove_simplex(self, s: frozenset) -> None:
        self.simplices.remove(s)
        for v in s:
            self._incident[v].discard(s)

    @property
    def vertices(self) -> List[int]:
        return sorted(self.coords)

    def sorted_simplices(self) -> List[frozenset]:
        return sorted(self.simplices, key=face_key)

    def containing(self, face: Iterable[int]) -> List[frozenset]:
        """Maximal simplices containing every vertex of ``face``."""
        face = list(face)
        if not face:
            return list(self.simplices)
        for v in face:
            if v not in self._incident:
                raise TriangulationError(f"unknown vertex {v}")
        sets = sorted((self._incident[v] for v in face), key=len)
        out = set(sets[0])
        for s in sets[1:]:
            out &= s
            if not out:
                break
        return list(out)

    def incident(self, v: int) -> Set[frozenset]:
        if v not in self._incident:
            raise TriangulationError(f"unknown vertex {v}")
        return self._incident[v]

    def is_face(self, face: Iterable[int]) -> bool:
        face = face if isinstance(face, frozenset) else frozenset(face)
        inc = self._incident
        if not face or any(v not in inc for v in face):
            return False
        pool = min((inc[v] for v in face), key=len)
        return any(face <= s for s in pool)

    def add_vertex(self, coords: Point, supp_face: int) -> int:
        v = self._next_id
        self._next_id += 1
        self.coords[v] = tuple(coords)
        self.supp[v] = supp_face
        self._incident[v] = set()
        return v

    def star_subdivide_inplace(self, face: Iterable[int]) -> int:
        face = frozenset(face)
        if len(face) < 2:
            raise TriangulationError("star subdivision needs a face with at least 2 vertices")
        hit = self.containing(face)
        if not hit:
            raise TriangulationError(f"{sorted(face)} is not a face of the triangulation")
        P = self.polytope
        supp = None
        for v in face:
            supp = self.supp[v] if supp is None else P.join(supp, self.supp[v])
        b = self.add_vertex(barycenter([self.coords[v] for v in sorted(face)]), supp)
        for s in hit:
            self._remove_simplex(s)
            for v in face:
                self._add_simplex((s - {v}) | {b})
        return b

    # measurements -------------------------------------------------------------

    def volume(self) -> Rational:
        d = self.polytope.dim
        total = Rational(0)
        for s in self.simplices:
            pts = [self.polytope.chart(self.coords[v]) for v in sorted(s)]
            if d == 0:
                return Rational(1)
            total += abs(det([sub(p, pts[0]) for p in pts[1:]]))
        return total / math.factorial(d)

    def simplex_volume(self, s: Iterable[int]) -> Rational:
        d = self.polytope.dim
        pts = [self.polytope.chart(self.coords[v]) for v in sorted(s)]
        if d == 0:
            return Rational(1)
        return abs(det([sub(p, pts[0]) for p in pts[1:]])) / math.factorial(d)

    def edges(self) -> Set[frozenset]:
        out = set()
        for s in self.simplices:
            for a, b in combinations(s, 2):
                out.add(frozenset((a, b)))
        return out

    def diameter_squared(self) -> Rational:
        """Exact squared length of the longest edge.

        Edge lengths are screened in floating point; only edges within a
        relative 1e-9 of the float maximum are evaluated exactly, which is far
        wider than double rounding error.
        """
        c = self.coords
        fc = {v: tuple(float(x) for x in p) for v, p in c.items()}
        approx = []
        for e in self.edges():
            a, b = tuple(e)
            approx.append((sum((x - y) ** 2 for x, y in zip(fc[a], fc[b])), a, b))
        if not approx:
            return Rational(0)
        top = max(d for d, _, _ in approx)
        best = Rational(0)
        for d, a, b in approx:
            if d >= top * (1 - 1e-9):
                d2 = sum(((x - y) ** 2 for x, y in zip(c[a], c[b])), Rational(0))
                if d2 > best:
                    best = d2
        return best

    def diameter(self) -> Rational:
        """Rational upper bound on the longest edge (exact when it is rational)."""
        return sqrt_upper(self.diameter_squared())

    def to_json(self) -> dict:
        return {
            "vertices": [
                {"id": v, "coords": fmt_point(self.coords[v]), "supp_face": self.supp[v]}
                for v in self.vertices
            ],
            "simplices": [sorted(s) for s in self.sorted_simplices()],
        }


# constructors ------------------------------------------------------------------

def from_simplices(P: Polytope, coords: Dict[int, Sequence], simplices: Iterable[Iterable[int]]) -> Triangulation:
    """Triangulation from explicit data; supports are computed with ``P.supp``."""
    pts = {v: tuple(Q(c) for c in x) for v, x in coords.items()}
    supp = {v: P.supp(x).id for v, x in pts.items()}
    return Triangulation(P, pts, supp, simplices)


def _flags(P: Polytope) -> List[List[int]]:
    faces = P.faces
    below: Dict[int, List[int]] = {f.id: [] for f in faces}
    for f in faces:
        for g in faces:
            if g.dim == f.dim - 1 and g.vertex_ids <= f.vertex_ids:
                below[f.id].append(g.id)
    chains = [[P.full_face.id]]
    for _ in range(P.dim):
        chains = [c + [g] for c in chains for g in below[c[-1]]]
    return chains


def initial_triangulation(P: Polytope) -> Triangulation:
    """Barycentric subdivision of the face lattice of P.

    One vertex per face (the face barycenter; the vertex itself for 0-faces),
    one maximal simplex per full flag. Vertex id == face id of P.
    """
    coords = {f.id: P.face_barycenter(f.id) for f in P.faces}
    supp = {f.id: f.id for f in P.faces}
    return Triangulation(P, coords, supp, [frozenset(c) for c in _flags(P)])


def star_subdivide(T: Triangulation, face: Iterable[int]) -> Tuple[Triangulation, int]:
    """Insert the barycenter b_F of ``face`` and re-triangulate its star.

    Every maximal simplex S containing F is replaced by the |F| simplices
    (S minus one vertex of F) plus b_F.
    """
    out = T.copy()
    b = out.star_subdivide_inplace(face)
    return out, b


def enumerate_faces(T: Triangulation, containing: Optional[int] = None) -> List[frozenset]:
    """All faces of T (optionally only those through a vertex), by size then ids."""
    if containing is None:
        pool = T.simplices
    else:
        pool = T.incident(containing)
        if not pool:
            raise TriangulationError(f"vertex {containing} lies in no simplex")
    out = set()
    for s in pool:
        items = sorted(s)
        for r in range(1, len(items) + 1):
            for c in combinations(items, r):
                if containing is None or containing in c:
                    out.add(frozenset(c))
    return sorted(out, key=face_key)


def _barycentric_refine(T: Triangulation) -> Triangulation:
    out = Triangulation(T.polytope, T.coords, T.supp, [])
    out._next_id = T._next_id
    P = T.polytope
    new_ids: Dict[frozenset, int] = {frozenset([v]): v for v in T.coords}

    def vid(face: frozenset) -> int:
        hit = new_ids.get(face)
        if hit is None:
            supp = None
            for v in face:
                supp = T.supp[v] if supp is None else P.join(supp, T.supp[v])
            hit = out.add_vertex(barycenter([T.coords[v] for v in sorted(face)]), supp)
            new_ids[face] = hit
        return hit

    for s in T.sorted_simplices():
        items = sorted(s)
        for perm in permutations(items):
            chain = [vid(frozenset(perm[: i + 1])) for i in range(len(perm))]
            out._add_simplex(frozenset(chain))
    return out


@lru_cache(maxsize=None)
def edgewise_template(d: int) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
    """The 2^d pieces of the edgewise (Freudenthal) subdivision of a d-simplex.

    Each piece lists its vertices as (a, b) pairs of local vertex indices,
    meaning the midpoint of local vertices a and b (a == b: the vertex
    itself). Local indices follow increasing global vertex id, which keeps
    neighbouring simplices compatible on shared faces.
    """
    if d == 0:
        return (((0, 0),),)
    pieces = set()
    for corner in product((0, 1), repeat=d):
        for perm in permutations(range(d)):
            z = list(corner)
            verts = [tuple(z)]
            for i in perm:
                z[i] += 1
                verts.append(tuple(z))
            if all(2 >= v[0] and all(v[i] >= v[i + 1] for i in range(d - 1)) and v[-1] >= 0 for v in verts):
                pieces.add(tuple(sorted(_kuhn_to_pair(v) for v in verts)))
    return tuple(sorted(pieces))


def _kuhn_to_pair(z: Tuple[int, ...]) -> Tuple[int, int]:
    full = (2,) + tuple(z) + (0,)
    drops = []
    for i in range(len(full) - 1):
        drops.extend([i] * (full[i] - full[i + 1]))
    return (drops[0], drops[1])


def _edgewise_refine(T: Triangulation) -> Triangulation:
    out = Triangulation(T.polytope, T.coords, T.supp, [])
    out._next_id = T._next_id
    P = T.polytope
    mids: Dict[Tuple[int, int], int] = {}
    d = P.dim
    template = edgewise_template(d)
    for s in T.sorted_simplices():
        loc = sorted(s)
        for piece in template:
            ids = []
            for a, b in piece:
                u, v = loc[a], loc[b]
                if u == v:
                    ids.append(u)
                    continue
                hit = mids.get((u, v))
                if hit is None:
                    cu, cv = T.coords[u], T.coords[v]
                    mid = tuple((x + y) / 2 for x, y in zip(cu, cv))
                    hit = out.add_vertex(mid, P.join(T.supp[u], T.supp[v]))
                    mids[(u, v)] = hit
                ids.append(hit)
            out._add_simplex(frozenset(ids))
    return out


def refine_global(T: Triangulation, scheme: str = "barycentric") -> Triangulation:
    """Subdivide every maximal simplex.

    ``barycentric`` shrinks the diameter by at least d/(d+1) per round but
    multiplies the simplex count by (d+1)!. ``edgewise`` splits each simplex
    into 2^d pieces with edges that are halves of edge-path sums, so the
    diameter decays like 2^-rounds; the solver uses it to reach small
    diameters.
    """
    if scheme == "barycentric":
        return _barycentric_refine(T)
    if scheme == "edgewise":
        return _edgewise_refine(T)
    raise ValueError(f"unknown refinement scheme {scheme!r}")


def diameter(T: Triangulation) -> Rational:
    return T.diameter()

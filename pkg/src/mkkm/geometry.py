"""Exact-rational polytopes with explicit face lattices.

Everything here is decided over ``Rational``; there is no epsilon anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .rational import Point, Q, Rational, affine_rank, barycenter, dot, point, rank_of, solve_linear, sub


class GeometryError(ValueError):
    pass


class NotInPolytope(GeometryError):
    pass


@dataclass(frozen=True)
class Face:
    id: int
    vertex_ids: frozenset
    dim: int

    def __repr__(self) -> str:
        return f"Face({self.id}, {sorted(self.vertex_ids)}, dim={self.dim})"


@dataclass(frozen=True)
class Facet:
    normal: Point
    offset: Rational  # <normal, x> <= offset on the polytope
    vertex_ids: frozenset


@dataclass(frozen=True)
class HullCertificate:
    """Nonnegative weights, summing to one, on indices into the queried point list."""

    coefficients: Tuple[Tuple[int, Rational], ...]

    def combination(self, pts: Sequence[Point]) -> Point:
        dim = len(pts[0])
        return tuple(sum((w * pts[i][c] for i, w in self.coefficients), Rational(0)) for c in range(dim))

    def is_valid_for(self, pts: Sequence[Point], p: Sequence[Rational]) -> bool:
        ws = [w for _, w in self.coefficients]
        return all(w >= 0 for w in ws) and sum(ws) == 1 and self.combination(pts) == tuple(p)


class Polytope:
    """A polytope given by vertices, facet inequalities and its face lattice.

    ``equalities`` pins down the affine hull when the polytope is not
    full-dimensional in its ambient space (the standard simplex lives in
    the hyperplane sum(x) = 1). ``chart`` maps ambient points to intrinsic
    coordinates of dimension ``dim``; it is only used for volumes.
    """

    def __init__(self, vertices, facets, equalities, chart_drop_last: bool, kind: str, spec: dict | None = None):
        self.vertices: Tuple[Point, ...] = tuple(vertices)
        self.facets: Tuple[Facet, ...] = tuple(facets)
        self.equalities = tuple(equalities)
        self._chart_drop_last = chart_drop_last
        self.kind = kind
        self.spec = spec
        self.ambient_dim = len(self.vertices[0])
        self.dim = affine_rank(self.vertices)
        self.faces: Tuple[Face, ...] = self._build_faces()
        self._by_vertices: Dict[frozenset, Face] = {f.vertex_ids: f for f in self.faces}
        self._subfaces: Dict[int, Tuple[int, ...]] = {}
        for f in self.faces:
            subs = [g for g in self.faces if g.vertex_ids <= f.vertex_ids]
            subs.sort(key=lambda g: (g.dim, g.id))
            self._subfaces[f.id] = tuple(g.id for g in subs)
        self._join_cache: Dict[Tuple[int, int], int] = {}

    # face lattice -----------------------------------------------------

    def _build_faces(self) -> Tuple[Face, ...]:
        everything = frozenset(range(len(self.vertices)))
        sets = {everything}
        frontier = {f.vertex_ids for f in self.facets}
        while frontier:
            sets |= frontier
            nxt = set()
            for a in frontier:
                for b in sets:
                    c = a & b
                    if c and c not in sets:
                        nxt.add(c)
            frontier = nxt
        sets.discard(frozenset())
        ordered = sorted(sets, key=lambda s: (affine_rank([self.vertices[i] for i in s]), sorted(s)))
        faces = []
        for i, s in enumerate(ordered):
            faces.append(Face(i, s, affine_rank([self.vertices[j] for j in s])))
        return tuple(faces)

    @property
    def full_face(self) -> Face:
        return self.faces[-1]

    def face(self, face_id: int) -> Face:
        return self.faces[face_id]

    def face_by_vertices(self, vertex_ids) -> Face:
        try:
            return self._by_vertices[frozenset(vertex_ids)]
        except KeyError:
            raise GeometryError(f"{sorted(vertex_ids)} is not the vertex set of a face") from None

    def vertex_face(self, vertex_index: int) -> Face:
        return self._by_vertices[frozenset([vertex_index])]

    def subfaces(self, face_id: int) -> Tuple[int, ...]:
        """Ids of faces contained in the given face, by (dim, id)."""
        return self._subfaces[face_id]

    def join(self, a: int, b: int) -> int:
        """Smallest face containing faces a and b."""
        if a == b:
            return a
        key = (a, b) if a < b else (b, a)
        hit = self._join_cache.get(key)
        if hit is None:
            union = self.faces[a].vertex_ids | self.faces[b].vertex_ids
            verts = frozenset(range(len(self.vertices)))
            for fc in self.facets:
                if union <= fc.vertex_ids:
                    verts &= fc.vertex_ids
            hit = self._by_vertices[verts].id
            self._join_cache[key] = hit
        return hit

    def face_points(self, face_id: int) -> List[Point]:
        return [self.vertices[i] for i in sorted(self.faces[face_id].vertex_ids)]

    def face_barycenter(self, face_id: int) -> Point:
        return barycenter(self.face_points(face_id))

    # point queries -------------------------------------------------------

    def contains(self, x: Sequence[Rational]) -> bool:
        if len(x) != self.ambient_dim:
            raise GeometryError(f"point has dimension {len(x)}, polytope lives in {self.ambient_dim}")
        if any(dot(n, x) != v for n, v in self.equalities):
            return False
        return all(dot(f.normal, x) <= f.offset for f in self.facets)

    def supp(self, x: Sequence[Rational]) -> Face:
        """Minimal face containing x."""
        if not self.contains(x):
            raise NotInPolytope(f"point {[str(c) for c in x]} is not in the polytope")
        verts = frozenset(range(len(self.vertices)))
        for f in self.facets:
            if dot(f.normal, x) == f.offset:
                verts &= f.vertex_ids
        return self._by_vertices[verts]

    def in_face(self, x: Sequence[Rational], face_id: int) -> bool:
        if not self.contains(x):
            return False
        target = self.faces[face_id].vertex_ids
        for f in self.facets:
            if target <= f.vertex_ids and dot(f.normal, x) != f.offset:
                return False
        return True

    def chart(self, x: Sequence[Rational]) -> Point:
        return tuple(x[:-1]) if self._chart_drop_last else tuple(x)

    def diameter_squared(self) -> Rational:
        vs = self.vertices
        return max((sum((a - b) ** 2 for a, b in zip(u, v)) for u, v in combinations(vs, 2)), default=Rational(0))

    def volume(self) -> Rational:
        """Intrinsic volume via the chart (fan from the first vertex over facets)."""
        from .simplicial import initial_triangulation

        return initial_triangulation(self).volume()

    def to_spec(self) -> dict:
        if self.spec is not None:
            return self.spec
        return {"kind": "explicit", "vertices": [[str(c) for c in v] for v in self.vertices]}


# constructors -------------------------------------------------------------

def simplex(k: int) -> Polytope:
    """Standard simplex conv(e_1, ..., e_k) in R^k (dimension k-1)."""
    if k < 1:
        raise GeometryError("simplex needs k >= 1")
    one, zero = Rational(1), Rational(0)
    verts = [tuple(one if i == j else zero for j in range(k)) for i in range(k)]
    facets = []
    if k >= 2:
        for i in range(k):
            normal = tuple(-one if j == i else zero for j in range(k))
            facets.append(Facet(normal, zero, frozenset(j for j in range(k) if j != i)))
    equalities = [(tuple(one for _ in range(k)), one)]
    return Polytope(verts, facets, equalities, True, "simplex", {"kind": "simplex", "k": k})


def regular_polygon(m: int, radius=1, grid: int = 1024) -> Polytope:
    """Rational m-gon approximating the regular one of the given radius, centred at 0.

    Vertex coordinates are rounded to multiples of radius/grid, which keeps
    denominators small; convex position is re-checked exactly.
    """
    if m < 3:
        raise GeometryError("a polygon needs at least 3 vertices")
    r = Q(radius)
    if r <= 0:
        raise GeometryError("radius must be positive")
    verts = []
    for i in range(m):
        theta = 2 * math.pi * i / m
        verts.append((r * Rational(round(math.cos(theta) * grid), grid),
                      r * Rational(round(math.sin(theta) * grid), grid)))
    if len(set(verts)) != m:
        raise GeometryError("rounded vertices collapsed; raise grid")
    facets = _facets_2d_cycle(verts)
    spec = {"kind": "regular_polygon", "m": m, "radius": str(r)}
    return Polytope(verts, facets, [], False, "regular_polygon", spec)


def _facets_2d_cycle(verts: Sequence[Point]) -> List[Facet]:
    facets = []
    m = len(verts)
    for i in range(m):
        a, b = verts[i], verts[(i + 1) % m]
        normal = (b[1] - a[1], a[0] - b[0])
        offset = dot(normal, a)
        others = [dot(normal, verts[j]) for j in range(m) if j not in (i, (i + 1) % m)]
        if all(o < offset for o in others):
            pass
        elif all(o > offset for o in others):
            normal, offset = (-normal[0], -normal[1]), -offset
        else:
            raise GeometryError("vertices are not in convex position")
        facets.append(Facet(normal, offset, frozenset([i, (i + 1) % m])))
    return facets


def _hyperplane_through(pts: Sequence[Point]) -> Optional[Tuple[Point, Rational]]:
    """Normal and offset of the hyperplane through d affinely independent points in R^d."""
    d = len(pts[0])
    base = pts[0]
    rows = [sub(p, base) for p in pts[1:]]
    if rank_of(rows) != d - 1:
        return None
    # nullspace vector of the (d-1) x d matrix: try unit right-hand sides
    for c in range(d):
        aug_rows = [list(r) for r in rows] + [[Rational(1) if j == c else Rational(0) for j in range(d)]]
        rhs = [Rational(0)] * (d - 1) + [Rational(1)]
        try:
            sol = solve_linear(aug_rows, rhs)
        except ValueError:
            continue
        if sol is not None:
            return sol, dot(sol, base)
    return None


def explicit(vertices: Sequence[Sequence]) -> Polytope:
    """Full-dimensional polytope (d <= 3) from a list of vertices.

    Every listed point must be a vertex, i.e. in strictly convex position.
    Facets come from brute force over d-subsets.
    """
    verts = [point(v) for v in vertices]
    if not verts:
        raise GeometryError("no vertices")
    d = len(verts[0])
    if any(len(v) != d for v in verts):
        raise GeometryError("vertices have mixed dimensions")
    if d > 3:
        raise GeometryError("explicit polytopes are limited to d <= 3")
    if len(set(verts)) != len(verts):
        raise GeometryError("duplicate vertices")
    if affine_rank(verts) != d:
        raise GeometryError("degenerate vertex list: not full-dimensional")
    facets: Dict[frozenset, Facet] = {}
    for combo in combinations(range(len(verts)), d):
        hp = _hyperplane_through([verts[i] for i in combo])
        if hp is None:
            continue
        normal, offset = hp
        vals = [dot(normal, v) for v in verts]
        if all(v <= offset for v in vals):
            pass
        elif all(v >= offset for v in vals):
            normal, offset = tuple(-c for c in normal), -offset
        else:
            continue
        on = frozenset(i for i in range(len(verts)) if dot(normal, verts[i]) == offset)
        if on not in facets:
            facets[on] = Facet(normal, offset, on)
    for i, v in enumerate(verts):
        others = [verts[j] for j in range(len(verts)) if j != i]
        if len(others) >= 1 and conv_contains(others, v) is not None:
            raise GeometryError(f"point {i} is not a vertex of the hull")
    ordered = sorted(facets.values(), key=lambda f: sorted(f.vertex_ids))
    return Polytope(verts, ordered, [], False, "explicit", None)


def from_spec(spec: dict) -> Polytope:
    kind = spec.get("kind")
    if kind == "simplex":
        return simplex(int(spec["k"]))
    if kind == "regular_polygon":
        return regular_polygon(int(spec["m"]), spec.get("radius", "1"))
    if kind == "explicit":
        return explicit(spec["vertices"])
    raise GeometryError(f"unknown polytope kind {kind!r}")


def polygon_facet_inner_min(P: Polytope) -> Rational:
    """Minimum of <x, y> over points x, y on a common facet.

    The inner product is bilinear, so the minimum over a segment pair is
    attained at endpoints.
    """
    best = None
    for f in P.facets:
        pts = [P.vertices[i] for i in f.vertex_ids]
        for a in pts:
            for b in pts:
                v = dot(a, b)
                best = v if best is None else min(best, v)
    return best


# convex hull membership -----------------------------------------------------

def _barycentric(pts: Sequence[Point], p: Sequence[Rational]) -> Optional[Tuple[Rational, ...]]:
    m = len(pts)
    d = len(p)
    rows = [[pts[i][c] for i in range(m)] for c in range(d)] + [[Rational(1)] * m]
    rhs = list(p) + [Rational(1)]
    try:
        return solve_linear(rows, rhs)
    except ValueError:
        return None


def conv_contains(pts: Sequence[Sequence[Rational]], p: Sequence[Rational]) -> Optional[HullCertificate]:
    """Exact convex-hull membership with a certificate.

    Tries affinely independent subsets by increasing size (lexicographic
    within a size); by Caratheodory one of size <= dim+1 works whenever p is
    in the hull.
    """
    pts = [tuple(Q(c) for c in q) for q in pts]
    p = tuple(Q(c) for c in p)
    if not pts:
        return None
    if any(len(q) != len(p) for q in pts):
        raise GeometryError("dimension mismatch in conv_contains")
    top = min(len(pts), affine_rank(pts) + 1)
    return _conv_search(tuple(pts), p, top)


def _conv_search(pts, p, top) -> Optional[HullCertificate]:
    for size in range(1, top + 1):
        for combo in combinations(range(len(pts)), size):
            sub_pts = [pts[i] for i in combo]
            if size > 1 and affine_rank(sub_pts) != size - 1:
                continue
            lam = _barycentric(sub_pts, p)
            if lam is not None and all(w >= 0 for w in lam):
                return HullCertificate(tuple(zip(combo, lam)))
    return None

"""M-Komiya cover oracles.

A cover assigns to every ground element ``w`` and face ``sigma`` of the
polytope a closed set A[w, sigma] (given by a membership predicate) and a
designated point y[w, sigma] in sigma.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .geometry import Face, NotInPolytope, Polytope, polygon_facet_inner_min
from .matroid import Matroid
from .rational import Point, Q, Rational, dot, fmt_point, point, solve_linear, sub


class NoLabel(RuntimeError):
    """No admissible (w, tau) exists: the oracle violates the M-Komiya condition."""


class CoverError(ValueError):
    pass


@dataclass(frozen=True)
class Halfspace:
    """The closed set {x : <normal, x> >= offset}."""

    normal: Point
    offset: Rational

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(Q(c) for c in self.normal))
        object.__setattr__(self, "offset", Q(self.offset))

    def holds(self, x: Sequence[Rational]) -> bool:
        return dot(self.normal, x) >= self.offset


@dataclass(frozen=True)
class Region:
    """Union of intersections of closed halfspaces, optionally clipped to the indexing face.

    ``any_of`` empty means the whole polytope. ``within_face`` intersects the
    set with the face sigma it is indexed by.
    """

    any_of: Tuple[Tuple[Halfspace, ...], ...] = ((),)
    within_face: bool = False

    def holds(self, x: Sequence[Rational]) -> bool:
        return any(all(h.holds(x) for h in conj) for conj in self.any_of)

    @classmethod
    def halfspaces(cls, hs: Iterable[Halfspace], within_face: bool = False) -> "Region":
        return cls((tuple(hs),), within_face)


WHOLE_FACE = Region(((),), True)


@dataclass(frozen=True)
class LabelChoice:
    w: int
    tau: int  # face id of the polytope


class CoverOracle:
    """Base class: subclasses implement ``_member`` and ``y_point``."""

    def __init__(self, matroid: Matroid, polytope: Polytope):
        self.matroid = matroid
        self.polytope = polytope

    def member(self, w: int, face_id: int, x: Sequence[Rational]) -> bool:
        if not self.polytope.contains(x):
            raise NotInPolytope("membership query outside the polytope")
        return self._member(w, face_id, tuple(x))

    def _member(self, w: int, face_id: int, x: Point) -> bool:
        raise NotImplementedError

    def y_point(self, w: int, face_id: int) -> Point:
        raise NotImplementedError

    def candidate_faces(self, w: int) -> Optional[frozenset]:
        """Face ids whose set may be nonempty for w (None: unknown, try all)."""
        return None

    def to_json(self) -> dict:
        raise NotImplementedError


class TableCover(CoverOracle):
    """Sets given per (w, face) as Regions; missing entries are empty.

    Designated points default to the face barycenter (the vertex itself for
    0-faces).
    """

    def __init__(self, matroid: Matroid, polytope: Polytope, sets: Dict[Tuple[int, int], Region],
                 points: Optional[Dict[Tuple[int, int], Point]] = None, kind: str = "table"):
        super().__init__(matroid, polytope)
        for (w, fid) in sets:
            if not 0 <= w < matroid.ground_size:
                raise CoverError(f"ground element {w} out of range")
            if not 0 <= fid < len(polytope.faces):
                raise CoverError(f"face id {fid} out of range")
        self.sets = dict(sets)
        self.points = dict(points or {})
        for (w, fid), y in self.points.items():
            if not polytope.in_face(y, fid):
                raise CoverError(f"designated point for ({w}, face {fid}) is not in the face")
        self.kind = kind
        self._cands: Dict[int, frozenset] = {}
        for (w, fid) in self.sets:
            self._cands[w] = self._cands.get(w, frozenset()) | {fid}

    def _member(self, w, face_id, x):
        region = self.sets.get((w, face_id))
        if region is None:
            return False
        if region.within_face and not self.polytope.in_face(x, face_id):
            return False
        return region.holds(x)

    def y_point(self, w, face_id):
        y = self.points.get((w, face_id))
        return y if y is not None else self.polytope.face_barycenter(face_id)

    def candidate_faces(self, w):
        return self._cands.get(w, frozenset())

    def to_json(self) -> dict:
        P = self.polytope
        out = []
        for (w, fid), region in sorted(self.sets.items()):
            entry = {"w": w, "face": sorted(P.faces[fid].vertex_ids)}
            if P.faces[fid].dim == 0:
                entry = {"w": w, "vertex": next(iter(P.faces[fid].vertex_ids))}
            entry["any_of"] = [
                [{"normal": fmt_point(h.normal), "offset": str(h.offset)} for h in conj] for conj in region.any_of
            ]
            if region.within_face:
                entry["within_face"] = True
            out.append(entry)
        return {"kind": self.kind, "sets": out}


def kkm_vertex(matroid: Matroid, polytope: Polytope, sets: Dict[Tuple[int, int], Region]) -> TableCover:
    """Vertex-only cover: ``sets`` maps (w, polytope vertex index) to a Region."""
    table = {}
    for (w, vertex), region in sets.items():
        if not 0 <= vertex < len(polytope.vertices):
            raise CoverError(f"vertex {vertex} out of range")
        table[(w, polytope.vertex_face(vertex).id)] = region
    return TableCover(matroid, polytope, table, kind="kkm_vertex")


# label selection -------------------------------------------------------------------

def choose_label(C: CoverOracle, x: Sequence[Rational], s: Optional[Face] = None,
                 forbidden: Iterable[int] = ()) -> LabelChoice:
    """Smallest w outside ``forbidden`` and smallest (dim, id) face tau inside supp(x) with x in A[w, tau]."""
    P = C.polytope
    x = tuple(x)
    if s is None:
        s = P.supp(x)
    banned = set(forbidden)
    subfaces = P.subfaces(s.id)
    for w in range(C.matroid.ground_size):
        if w in banned:
            continue
        cands = C.candidate_faces(w)
        for fid in subfaces:
            if cands is not None and fid not in cands:
                continue
            if C._member(w, fid, x):
                return LabelChoice(w, fid)
    raise NoLabel(f"no admissible label at {fmt_point(x)} outside {sorted(banned)}: cover is not M-Komiya")


# validation --------------------------------------------------------------------------

@dataclass
class ValidationReport:
    ok: bool
    resolution: int
    samples_checked: int
    violation: Optional[dict] = None

    def to_json(self) -> dict:
        return {"ok": self.ok, "resolution": self.resolution, "samples_checked": self.samples_checked,
                "violation": self.violation}


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def face_grid(P: Polytope, face_id: int, resolution: int) -> List[Point]:
    """Barycentric grid of the given resolution on every simplex of a triangulation of the face.

    Simplicial faces are gridded directly; other faces use the flags of their
    own face lattice, so the grid always contains the face's vertices.
    """
    face = P.faces[face_id]
    if len(face.vertex_ids) == face.dim + 1:
        simplices = [[P.vertices[i] for i in sorted(face.vertex_ids)]]
    else:
        simplices = []
        chains = [[face_id]]
        for _ in range(face.dim):
            chains = [c + [g.id] for c in chains for g in P.faces
                      if g.dim == P.faces[c[-1]].dim - 1 and g.vertex_ids <= P.faces[c[-1]].vertex_ids]
        for c in chains:
            simplices.append([P.face_barycenter(fid) for fid in c])
    seen = {}
    for verts in simplices:
        for comp in _compositions(resolution, len(verts)):
            pt = tuple(sum((Rational(c, resolution) * v[i] for c, v in zip(comp, verts)), Rational(0))
                       for i in range(P.ambient_dim))
            seen.setdefault(pt, None)
    return list(seen)


def validate_mkomiya(C: CoverOracle, resolution: int = 8) -> ValidationReport:
    """Grid check of the M-Komiya condition on hyperplane complements.

    For every hyperplane H of the matroid, G = W minus H is a minimal set with
    r(W - G) <= k - 1; larger G only enlarge the unions. For every face tau and
    every grid sample x on tau, some w in G and face sigma inside tau must have
    x in A[w, sigma]. Sound for the samples checked, not a proof.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    M, P = C.matroid, C.polytope
    checked = 0
    grids = {f.id: face_grid(P, f.id, resolution) for f in P.faces}
    for H in M.hyperplanes():
        G = [w for w in M.ground if w not in H.elements]
        for tau in P.faces:
            subs = P.subfaces(tau.id)
            for x in grids[tau.id]:
                checked += 1
                if not any(C._member(w, sid, x) for w in G for sid in subs):
                    return ValidationReport(False, resolution, checked, {
                        "hyperplane": sorted(H.elements),
                        "complement": G,
                        "face": tau.id,
                        "face_vertices": sorted(tau.vertex_ids),
                        "sample": fmt_point(x),
                    })
    return ValidationReport(True, resolution, checked, None)


# special constructions ---------------------------------------------------------------

def ray_hit(face_pts: Sequence[Point], v: Sequence[Rational]) -> Optional[Point]:
    """Intersection of a vertex or edge with the open ray {t v : t > 0}, if any (planar)."""
    if len(face_pts) == 1:
        p = face_pts[0]
        cross = p[0] * v[1] - p[1] * v[0]
        return p if cross == 0 and dot(p, v) > 0 else None
    if len(face_pts) != 2:
        raise CoverError("ray intersection is only implemented for vertices and edges")
    a, b = face_pts
    # a + s (b - a) = t v,  0 <= s <= 1, t > 0
    e = sub(b, a)
    try:
        sol = solve_linear([[e[0], -v[0]], [e[1], -v[1]]], [-a[0], -a[1]])
    except ValueError:
        return None
    if sol is None:
        return None
    s, t = sol
    if 0 <= s <= 1 and t > 0:
        return (a[0] + s * e[0], a[1] + s * e[1])
    return None


class CaratheodoryCover(CoverOracle):
    """Cover built from a planar point set V.

    A[v, P] is empty. For a proper face sigma meeting the ray through v,
    A[v, sigma] = {x in P : <x, v> >= 0} with y = the intersection point;
    otherwise A[v, sigma] = sigma with y = the barycenter of sigma.
    """

    def __init__(self, matroid: Matroid, polytope: Polytope, points: Sequence[Sequence]):
        super().__init__(matroid, polytope)
        pts = [point(p) for p in points]
        if len(pts) != matroid.ground_size:
            raise CoverError("one point per ground element is required")
        if polytope.ambient_dim != 2 or polytope.dim != 2:
            raise CoverError("the Caratheodory cover is planar")
        for p in pts:
            if len(p) != 2:
                raise CoverError("points must be planar")
            if p == (0, 0):
                raise CoverError("the origin may not be one of the points")
        if polygon_facet_inner_min(polytope) < 0:
            raise CoverError("polygon facets must have angular width below 90 degrees")
        if not polytope.contains((Rational(0), Rational(0))) or polytope.supp((Rational(0), Rational(0))).id != polytope.full_face.id:
            raise CoverError("the polygon must contain the origin in its interior")
        self.points = pts
        self._hit: Dict[Tuple[int, int], Optional[Point]] = {}
        full = polytope.full_face.id
        for w, v in enumerate(pts):
            for f in polytope.faces:
                if f.id != full:
                    self._hit[(w, f.id)] = ray_hit(polytope.face_points(f.id), v)

    def meets_ray(self, w: int, face_id: int) -> bool:
        return self._hit.get((w, face_id)) is not None

    def _member(self, w, face_id, x):
        if face_id == self.polytope.full_face.id:
            return False
        if self._hit[(w, face_id)] is not None:
            return dot(x, self.points[w]) >= 0
        return self.polytope.in_face(x, face_id)

    def y_point(self, w, face_id):
        hit = self._hit.get((w, face_id))
        return hit if hit is not None else self.polytope.face_barycenter(face_id)

    def candidate_faces(self, w):
        return frozenset(fid for (ww, fid) in self._hit if ww == w)

    def to_json(self) -> dict:
        return {"kind": "caratheodory", "points": [fmt_point(p) for p in self.points]}


@dataclass(frozen=True)
class Density:
    """Piecewise-linear nonnegative density on [0, 1].

    Segments are (start, end, value_at_start, value_at_end); the density is
    zero outside them.
    """

    segments: Tuple[Tuple[Rational, Rational, Rational, Rational], ...]

    @classmethod
    def from_json(cls, items: Sequence[dict]) -> "Density":
        segs = []
        for it in items:
            a, b = Q(it["from"]), Q(it["to"])
            v0 = Q(it["value"])
            v1 = Q(it.get("value_to", it["value"]))
            segs.append((a, b, v0, v1))
        return cls.build(segs)

    @classmethod
    def build(cls, segs: Iterable[Tuple]) -> "Density":
        out = []
        for a, b, v0, v1 in segs:
            a, b, v0, v1 = Q(a), Q(b), Q(v0), Q(v1)
            if not 0 <= a <= b <= 1:
                raise CoverError("density breakpoints must be sorted inside [0, 1]")
            if v0 < 0 or v1 < 0:
                raise CoverError("negative densities are not allowed")
            out.append((a, b, v0, v1))
        out.sort()
        for s1, s2 in zip(out, out[1:]):
            if s2[0] < s1[1]:
                raise CoverError("density segments overlap")
        return cls(tuple(out))

    def cumulative(self, t: Rational) -> Rational:
        """Integral of the density over [0, t], exact."""
        total = Rational(0)
        for a, b, v0, v1 in self.segments:
            if t <= a:
                break
            hi = min(t, b)
            if b == a:
                continue
            slope = (v1 - v0) / (b - a)
            u = hi - a
            total += v0 * u + slope * u * u / 2
        return total

    def value(self, lo: Rational, hi: Rational) -> Rational:
        return self.cumulative(hi) - self.cumulative(lo)

    def max_value(self) -> Rational:
        return max((max(v0, v1) for _, _, v0, v1 in self.segments), default=Rational(0))

    def to_json(self) -> List[dict]:
        out = []
        for a, b, v0, v1 in self.segments:
            item = {"from": str(a), "to": str(b), "value": str(v0)}
            if v1 != v0:
                item["value_to"] = str(v1)
            out.append(item)
        return out


def piece_bounds(x: Sequence[Rational]) -> List[Tuple[Rational, Rational]]:
    """Piece i of the partition with lengths x is [x_1+...+x_{i-1}, x_1+...+x_i]."""
    out = []
    acc = Rational(0)
    for xi in x:
        out.append((acc, acc + xi))
        acc += xi
    return out


def piece_values(density: Density, x: Sequence[Rational]) -> List[Rational]:
    return [density.value(lo, hi) for lo, hi in piece_bounds(x)]


class CakeCover(CoverOracle):
    """Vertex-only cover on the simplex of piece lengths.

    A[j, vertex i] = {x : guest j weakly prefers piece i}, a closed set.
    """

    def __init__(self, matroid: Matroid, polytope: Polytope, guests: Sequence[Density]):
        super().__init__(matroid, polytope)
        if polytope.kind != "simplex":
            raise CoverError("the cake cover lives on a standard simplex")
        if len(guests) != matroid.ground_size:
            raise CoverError("one density per guest is required")
        self.guests = list(guests)
        self._vertex_of_face = {polytope.vertex_face(i).id: i for i in range(len(polytope.vertices))}
        self._vfaces = frozenset(self._vertex_of_face)
        self._cache: Dict[Tuple[int, Point], Tuple[Rational, ...]] = {}

    def values(self, guest: int, x: Point) -> Tuple[Rational, ...]:
        key = (guest, x)
        hit = self._cache.get(key)
        if hit is None:
            hit = tuple(piece_values(self.guests[guest], x))
            self._cache[key] = hit
        return hit

    def prefers(self, guest: int, piece: int, x: Point) -> bool:
        vals = self.values(guest, x)
        return vals[piece] >= max(vals)

    def _member(self, w, face_id, x):
        piece = self._vertex_of_face.get(face_id)
        if piece is None:
            return False
        return self.prefers(w, piece, x)

    def y_point(self, w, face_id):
        return self.polytope.face_barycenter(face_id)

    def candidate_faces(self, w):
        return self._vfaces

    def to_json(self) -> dict:
        return {"kind": "cake", "guests": [{"density": g.to_json()} for g in self.guests]}


def build_special(kind: str, matroid: Matroid, polytope: Polytope, **params) -> CoverOracle:
    """Factory for the three named constructions: kkm_vertex, caratheodory, cake."""
    if kind == "kkm_vertex":
        return kkm_vertex(matroid, polytope, params["sets"])
    if kind == "caratheodory":
        return CaratheodoryCover(matroid, polytope, params["points"])
    if kind == "cake":
        return CakeCover(matroid, polytope, params["guests"])
    raise CoverError(f"unknown cover kind {kind!r}")

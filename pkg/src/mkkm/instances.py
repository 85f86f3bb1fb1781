"""JSON instance parsing with JSON-pointer error paths."""

from __future__ import annotations

import json
from typing import Any, Dict, List, Tuple

from . import geometry, matroid
from .cover import CoverError, CoverOracle, Density, Halfspace, Region, TableCover
from .geometry import GeometryError, Polytope
from .matroid import Matroid, MatroidError
from .rational import Q, Rational


class InstanceError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path or '/'}: {msg}")
        self.path = path or "/"
        self.msg = msg


def _ptr(path: str, key) -> str:
    return f"{path}/{str(key).replace('~', '~0').replace('/', '~1')}"


def _get(doc, key, path: str, kind=None):
    if not isinstance(doc, dict):
        raise InstanceError(path, "expected an object")
    if key not in doc:
        raise InstanceError(_ptr(path, key), "missing")
    val = doc[key]
    if kind is not None and not _is(val, kind):
        raise InstanceError(_ptr(path, key), f"expected {kind.__name__ if isinstance(kind, type) else kind}")
    return val


def _is(val, kind) -> bool:
    if kind is int:
        return isinstance(val, int) and not isinstance(val, bool)
    return isinstance(val, kind)


def _rational(val, path: str) -> Rational:
    if isinstance(val, bool) or not isinstance(val, (str, int)):
        raise InstanceError(path, "expected a rational as a string or an integer")
    try:
        return Q(val)
    except (ValueError, ZeroDivisionError):
        raise InstanceError(path, f"not a rational: {val!r}") from None


def _vector(val, path: str, dim=None) -> Tuple[Rational, ...]:
    if not isinstance(val, list):
        raise InstanceError(path, "expected an array")
    if dim is not None and len(val) != dim:
        raise InstanceError(path, f"expected {dim} components")
    return tuple(_rational(c, _ptr(path, i)) for i, c in enumerate(val))


def _list(val, path: str) -> list:
    if not isinstance(val, list):
        raise InstanceError(path, "expected an array")
    return val


def _wrap(path: str, fn, *args):
    try:
        return fn(*args)
    except (MatroidError, GeometryError, CoverError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(path, str(exc)) from None


# fragments -----------------------------------------------------------------------------

def parse_matroid(spec, path: str = "") -> Matroid:
    kind = _get(spec, "kind", path, str)
    if kind == "uniform":
        n, k = _get(spec, "n", path, int), _get(spec, "k", path, int)
        return _wrap(path, matroid.uniform, n, k)
    if kind == "partition":
        parts = _list(_get(spec, "parts", path), _ptr(path, "parts"))
        for i, part in enumerate(parts):
            for j, e in enumerate(_list(part, _ptr(_ptr(path, "parts"), i))):
                if not _is(e, int):
                    raise InstanceError(_ptr(_ptr(_ptr(path, "parts"), i), j), "expected an integer")
        return _wrap(path, matroid.partition, parts)
    if kind == "linear":
        vp = _ptr(path, "vectors")
        vecs = [_vector(v, _ptr(vp, i)) for i, v in enumerate(_list(_get(spec, "vectors", path), vp))]
        return _wrap(path, matroid.linear, vecs)
    if kind == "truncate":
        inner = parse_matroid(_get(spec, "inner", path, dict), _ptr(path, "inner"))
        return _wrap(path, matroid.truncate, inner, _get(spec, "rank", path, int))
    raise InstanceError(_ptr(path, "kind"), f"unknown matroid kind {kind!r}")


def parse_polytope(spec, path: str = "") -> Polytope:
    kind = _get(spec, "kind", path, str)
    if kind == "simplex":
        return _wrap(path, geometry.simplex, _get(spec, "k", path, int))
    if kind == "regular_polygon":
        radius = _rational(spec.get("radius", "1"), _ptr(path, "radius"))
        return _wrap(path, geometry.regular_polygon, _get(spec, "m", path, int), radius)
    if kind == "explicit":
        vp = _ptr(path, "vertices")
        verts = [_vector(v, _ptr(vp, i)) for i, v in enumerate(_list(_get(spec, "vertices", path), vp))]
        return _wrap(path, geometry.explicit, verts)
    raise InstanceError(_ptr(path, "kind"), f"unknown polytope kind {kind!r}")


def _halfspaces(items, path: str, dim: int) -> Tuple[Halfspace, ...]:
    out = []
    for i, h in enumerate(_list(items, path)):
        hp = _ptr(path, i)
        out.append(Halfspace(_vector(_get(h, "normal", hp), _ptr(hp, "normal"), dim),
                             _rational(_get(h, "offset", hp), _ptr(hp, "offset"))))
    return tuple(out)


def parse_cover(spec, M: Matroid, P: Polytope, path: str = "") -> CoverOracle:
    """Table covers: kind "kkm_vertex" (vertex entries only) or "table".

    Each set entry names ``w`` and either ``vertex`` (a polytope vertex index)
    or ``face`` (a list of vertex indices), then ``halfspaces`` (one
    intersection) or ``any_of`` (a union of intersections), plus an optional
    ``within_face`` flag.
    """
    kind = _get(spec, "kind", path, str)
    if kind not in ("kkm_vertex", "table"):
        raise InstanceError(_ptr(path, "kind"), f"unknown cover kind {kind!r}")
    dim = len(P.vertices[0])
    sets: Dict[Tuple[int, int], Region] = {}
    sp = _ptr(path, "sets")
    for i, entry in enumerate(_list(_get(spec, "sets", path), sp)):
        ep = _ptr(sp, i)
        w = _get(entry, "w", ep, int)
        if not 0 <= w < M.ground_size:
            raise InstanceError(_ptr(ep, "w"), f"ground element {w} out of range")
        if "vertex" in entry:
            v = _get(entry, "vertex", ep, int)
            if not 0 <= v < len(P.vertices):
                raise InstanceError(_ptr(ep, "vertex"), f"vertex {v} out of range")
            fid = P.vertex_face(v).id
        elif kind == "table":
            ids = _list(_get(entry, "face", ep), _ptr(ep, "face"))
            try:
                fid = P.face_by_vertices(ids).id
            except (KeyError, GeometryError, TypeError):
                raise InstanceError(_ptr(ep, "face"), f"{ids} is not a face") from None
        else:
            raise InstanceError(_ptr(ep, "vertex"), "missing")
        if "any_of" in entry:
            ap = _ptr(ep, "any_of")
            any_of = tuple(_halfspaces(c, _ptr(ap, j), dim) for j, c in enumerate(_list(entry["any_of"], ap)))
        else:
            any_of = (_halfspaces(_get(entry, "halfspaces", ep), _ptr(ep, "halfspaces"), dim),)
        within = entry.get("within_face", False)
        if not isinstance(within, bool):
            raise InstanceError(_ptr(ep, "within_face"), "expected a boolean")
        if (w, fid) in sets:
            raise InstanceError(ep, "duplicate set entry")
        sets[(w, fid)] = Region(any_of, within)
    return _wrap(path, TableCover, M, P, sets, None, kind)


def parse_instance(doc) -> CoverOracle:
    """{"polytope": ..., "matroid": ..., "cover": ...}."""
    P = parse_polytope(_get(doc, "polytope", ""), "/polytope")
    M = parse_matroid(_get(doc, "matroid", ""), "/matroid")
    return parse_cover(_get(doc, "cover", ""), M, P, "/cover")


def is_cake(doc) -> bool:
    return isinstance(doc, dict) and "guests" in doc


def parse_cake(doc):
    from .apps import CakeInstance
    gp = "/guests"
    guests: List[Density] = []
    for i, g in enumerate(_list(_get(doc, "guests", ""), gp)):
        dp = _ptr(_ptr(gp, i), "density")
        items = _list(_get(g, "density", _ptr(gp, i)), dp)
        for j, it in enumerate(items):
            ip = _ptr(dp, j)
            for key in ("from", "to", "value"):
                _rational(_get(it, key, ip), _ptr(ip, key))
            if "value_to" in it:
                _rational(it["value_to"], _ptr(ip, "value_to"))
        guests.append(_wrap(dp, Density.from_json, items))
    k = _get(doc, "pieces", "", int)
    M = parse_matroid(_get(doc, "matroid", ""), "/matroid")
    return _wrap("", CakeInstance, guests, k, M)


def parse_points(doc):
    from .apps import CaratheodoryInstance
    pp = "/points"
    pts = [_vector(p, _ptr(pp, i), 2) for i, p in enumerate(_list(_get(doc, "points", ""), pp))]
    M = parse_matroid(_get(doc, "matroid", ""), "/matroid")
    return _wrap("", CaratheodoryInstance, pts, M)


def load(path: str) -> Any:
    """Read a JSON file; unreadable files and bad JSON become InstanceError."""
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InstanceError("", f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise InstanceError("", f"invalid JSON in {path}: {exc}") from None

"""The worked rhombus example: four labeled vertices, one bad edge, three iterations.

Vertex names: a=0, b=1, c=2, d=3 are the rhombus corners; the algorithm adds
e=4 (barycenter of {a,b}), then f=5, g=6, h=7. Ground elements v1..v4 are
0..3. The rhombus uses height 3 instead of an irrational one; only the
combinatorics matter.

The initial labels (a, b -> v1, c -> v2, d -> v3) are supplied explicitly:
they are admissible for the cover below but are not what the smallest-id
rule would pick.
"""

from __future__ import annotations

from typing import Dict, List

from .cover import WHOLE_FACE, TableCover
from .geometry import Polytope, explicit
from .matroid import Matroid, linear
from .simplicial import Triangulation, from_simplices
from .solver import Labeling, bad_faces, check_good, eliminate_bad_face

NAMES = "abcdefgh"
ELEMENTS = ("v1", "v2", "v3", "v4")

GOLDEN = {
    "initial_bad_faces": [[0, 1]],
    "setup_queue": {3: [[0, 2, 4], [1, 2, 4], [3, 4]]},
    "iterations": 3,
    "popped": [[0, 2, 4], [1, 2, 4], [3, 4]],
    "vertex_count": 8,
    "triangle_count": 10,
    "barycenter_labels": [2, 3, 3, 3],
    "final_bad_faces": 0,
}


def rhombus_matroid() -> Matroid:
    return linear([(1, 1, 0), (-1, 1, 0), (0, 1, 0), (0, 0, 1)])


def rhombus() -> Polytope:
    return explicit([(-2, 0), (2, 0), (0, 3), (0, -3)])


def rhombus_cover(P: Polytope = None, M: Matroid = None) -> TableCover:
    """A[w, sigma] = sigma for v1, v3, v4 on every face; v2 only at the vertex c."""
    P = P or rhombus()
    M = M or rhombus_matroid()
    sets: Dict = {}
    for face in P.faces:
        for w in (0, 2, 3):
            sets[(w, face.id)] = WHOLE_FACE
    sets[(1, P.vertex_face(2).id)] = WHOLE_FACE
    return TableCover(M, P, sets, kind="table")


def initial_state(C: TableCover):
    P = C.polytope
    T = from_simplices(P, {i: v for i, v in enumerate(P.vertices)}, [(0, 1, 2), (0, 1, 3)])
    L = Labeling()
    for v, w in zip(range(4), (0, 0, 1, 2)):
        fid = P.vertex_face(v).id
        L.lam[v], L.f[v], L.y[v] = fid, w, C.y_point(w, fid)
    return T, L


def _state(T: Triangulation, L: Labeling) -> dict:
    dump = T.to_json()
    for vert in dump["vertices"]:
        vert["name"] = NAMES[vert["id"]] if vert["id"] < len(NAMES) else str(vert["id"])
        vert["label"] = ELEMENTS[L.f[vert["id"]]]
    return dump


def run_demo(check: bool = True) -> dict:
    """Run the example end to end and compare against the golden trace."""
    C = rhombus_cover()
    M = C.matroid
    T, L = initial_state(C)
    states: List[dict] = [{"step": "initial", **_state(T, L)}]
    initial_bad = sorted(sorted(F) for F in bad_faces(T, L, M))

    def observe(step, Tc, Lc):
        states.append({"step": step, **_state(Tc, Lc)})

    T2, L2, stats = eliminate_bad_face(T, L, [0, 1], C, check=check, record=True, observer=observe)
    check_good(T2, L2, M)
    popped = [ev["face"] for ev in stats.trace if ev["step"] == "iteration"]
    observed = {
        "initial_bad_faces": initial_bad,
        "setup_queue": stats.setup_queue,
        "iterations": stats.iterations,
        "popped": popped,
        "vertex_count": len(T2.vertices),
        "triangle_count": len(T2.simplices),
        "barycenter_labels": [L2.f[v] for v in stats.new_vertices],
        "final_bad_faces": len(bad_faces(T2, L2, M)),
    }
    mismatches = [key for key in GOLDEN if GOLDEN[key] != observed[key]]
    return {
        "pass": not mismatches,
        "mismatches": mismatches,
        "observed": {**observed, "setup_queue": {str(j): q for j, q in observed["setup_queue"].items()},
                     "barycenter_labels": [ELEMENTS[w] for w in observed["barycenter_labels"]]},
        "trace": stats.trace,
        "states": states,
    }

"""Applications: envy-free cake division, planar colorful Caratheodory, Gale's colorful KKM."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .cover import (CakeCover, CaratheodoryCover, Density, Halfspace, NoLabel, Region, kkm_vertex, piece_values,
                    validate_mkomiya)
from .geometry import HullCertificate, conv_contains, regular_polygon, simplex
from .matroid import Matroid, partition, truncate
from .rational import Point, Q, Rational, barycenter, fmt_point, point
from .solver import Witness, solve


class HypothesisError(ValueError):
    """The input does not satisfy the theorem's hypothesis."""


# cake division ------------------------------------------------------------------

@dataclass
class CakeInstance:
    guests: List[Density]
    pieces: int
    matroid: Matroid

    def __post_init__(self):
        if self.matroid.ground_size != len(self.guests):
            raise ValueError("the matroid must have one element per guest")
        if self.pieces < 1:
            raise ValueError("at least one piece is needed")
        if self.matroid.rank_of_matroid != self.pieces:
            raise ValueError(f"matroid rank {self.matroid.rank_of_matroid} must equal the piece count {self.pieces}")

    def cover(self) -> CakeCover:
        return CakeCover(self.matroid, simplex(self.pieces), self.guests)


@dataclass
class Allocation:
    cut_points: Tuple[Rational, ...]
    lengths: Tuple[Rational, ...]
    assignment: Tuple[Tuple[int, int], ...]  # (guest, piece index), pieces numbered from 0
    envy_gap: Rational
    envy_bound: Rational  # rigorous bound implied by the witness simplex
    witness: Optional[Witness] = None

    def to_json(self) -> dict:
        out = {
            "cut_points": fmt_point(self.cut_points),
            "lengths": fmt_point(self.lengths),
            "assignment": [[g, i] for g, i in self.assignment],
            "envy_gap": str(self.envy_gap),
            "envy_bound": str(self.envy_bound),
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def cuts_of(lengths: Sequence[Rational]) -> Tuple[Rational, ...]:
    out, acc = [], Rational(0)
    for x in lengths[:-1]:
        acc += x
        out.append(acc)
    return tuple(out)


def envy_gap(guests: Sequence[Density], lengths: Sequence[Rational], assignment) -> Rational:
    """Largest amount by which an assigned guest values another piece over their own."""
    gap = Rational(0)
    for g, i in assignment:
        vals = piece_values(guests[g], lengths)
        gap = max(gap, max(vals) - vals[i])
    return gap


def cake_solve(inst: CakeInstance, delta=None, *, resolution: int = 8) -> Allocation:
    """Envy-free division among a basis of guests, up to the witness resolution.

    The M-hungry condition is checked first with the grid validator. The
    partition is the center of the witness simplex. Every vertex of that
    simplex has its guest weakly preferring their piece, and moving the
    partition shifts each cut by at most the largest cut displacement D, so
    the envy at the center is below 4 * max density * D (``envy_bound``).
    """
    k = inst.pieces
    loops = set(inst.matroid.loops())
    if k == 1:
        guest = next(g for g in range(len(inst.guests)) if g not in loops)
        return Allocation((), (Rational(1),), ((guest, 0),), Rational(0), Rational(0), None)
    C = inst.cover()
    report = validate_mkomiya(C, resolution)
    if not report.ok:
        raise HypothesisError(f"guests are not M-hungry: {report.violation}")
    wit = solve(C, barycenter(list(C.polytope.vertices)), delta)
    center = wit.center()
    P = C.polytope
    piece_of = {P.vertex_face(i).id: i for i in range(k)}
    assignment = tuple(sorted((g, piece_of[fid]) for g, fid in zip(wit.basis, wit.faces)))
    gap = envy_gap(inst.guests, center, assignment)
    cuts = cuts_of(center)
    shift = max((abs(a - b) for x in wit.vertex_coords for a, b in zip(cuts_of(x), cuts)), default=Rational(0))
    L = max(g.max_value() for g in inst.guests)
    return Allocation(cuts, center, assignment, gap, 4 * L * shift, wit)


# planar colorful Caratheodory -------------------------------------------------------

@dataclass
class CaratheodoryInstance:
    points: List[Point]
    matroid: Matroid

    def __post_init__(self):
        self.points = [point(p) for p in self.points]
        if len(self.points) != self.matroid.ground_size:
            raise ValueError("one point per ground element is required")
        if any(len(p) != 2 for p in self.points):
            raise ValueError("points must be planar")


@dataclass
class CaratheodoryResult:
    independent: Tuple[int, ...]
    certificate: HullCertificate  # indexes ``independent``
    trivial: bool = False  # the origin itself is one of the points
    witness: Optional[Witness] = None

    def to_json(self) -> dict:
        out = {
            "independent": list(self.independent),
            "certificate": [[self.independent[i], str(w)] for i, w in self.certificate.coefficients],
            "trivial": self.trivial,
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def hypothesis_violation(inst: CaratheodoryInstance) -> Optional[List[int]]:
    """A set G with r(V - G) <= 2 and 0 outside conv(G), or None when the hypothesis holds.

    The minimal such G are complements of rank-2 flats, and enlarging G only
    enlarges conv(G). Below rank 3 the empty set already qualifies.
    """
    M = inst.matroid
    origin = (Rational(0), Rational(0))
    if M.rank_of_matroid < 3:
        return []
    flats = {M.closure(pair).elements for pair in combinations(M.ground, 2) if M.rank(pair) == 2}
    for F in sorted(flats, key=sorted):
        G = [w for w in M.ground if w not in F]
        if not G or conv_contains([inst.points[w] for w in G], origin) is None:
            return G
    return None


def caratheodory_solve(inst: CaratheodoryInstance, *, check_hypothesis: bool = True, polygon_sides: int = 16,
                       first_delta_fraction: int = 2, attempts: int = 4) -> CaratheodoryResult:
    """Independent set whose hull contains the origin, with an exact certificate.

    Loops are deleted, the matroid is truncated to rank 3 and the ray cover on
    a regular polygon is solved at p = 0. A basis element whose face meets its
    ray has y = t v with t > 0, so the certificate carries over to the input
    points after rescaling. If the witness at the current resolution misses,
    delta is halved.
    """
    M = inst.matroid
    origin = (Rational(0), Rational(0))
    if check_hypothesis:
        bad = hypothesis_violation(inst)
        if bad is not None:
            raise HypothesisError(f"the origin is not in conv(G) for G = {bad}, whose complement has rank <= 2")
    for w, p in enumerate(inst.points):
        if p == origin and M.rank([w]) == 1:
            return CaratheodoryResult((w,), HullCertificate(((0, Rational(1)),)), True)
    keep = [w for w in M.ground if M.rank([w]) == 1 and inst.points[w] != origin]
    core = M.restrict(keep)
    if core.rank_of_matroid < 3:
        raise HypothesisError("after deleting loops the matroid has rank below 3")
    M3 = truncate(core, 3)
    P = regular_polygon(polygon_sides)
    C = CaratheodoryCover(M3, P, [inst.points[w] for w in keep])
    diam2 = P.diameter_squared()
    last = None
    for attempt in range(attempts):
        scale = first_delta_fraction << attempt
        try:
            wit = solve(C, origin, delta_squared=diam2 / (scale * scale))
        except NoLabel as exc:
            raise HypothesisError(f"the ray cover is not M-Komiya: {exc}") from exc
        last = wit
        chosen = sorted({keep[w] for w, fid in zip(wit.basis, wit.faces) if C.meets_ray(w, fid)})
        if not chosen:
            continue
        cert = conv_contains([inst.points[w] for w in chosen], origin)
        if cert is not None and M.is_independent(chosen):
            return CaratheodoryResult(tuple(chosen), cert, False, wit)
    raise RuntimeError(f"no certified independent set after {attempts} refinements; last basis {last.basis if last else None}")


# Gale's colorful KKM through a partition matroid ----------------------------------------

def gale_cover(intervals: Sequence[Tuple]):
    """k = 2 colorful KKM on the segment, encoded with a partition matroid.

    ``intervals[j] = (a_j, b_j)`` with a_j <= b_j gives cover j:
    A_1^j = {x_1 >= a_j} at vertex 1 and A_2^j = {x_1 <= b_j} at vertex 2.
    Ground element 2 j + i - 1 stands for (i, j); the parts are the covers.
    """
    P = simplex(2)
    M = partition([[2 * j, 2 * j + 1] for j in range(len(intervals))])
    sets = {}
    for j, (a, b) in enumerate(intervals):
        a, b = Q(a), Q(b)
        if not 0 <= a <= b <= 1:
            raise ValueError("need 0 <= a_j <= b_j <= 1")
        sets[(2 * j, 0)] = Region.halfspaces([Halfspace((Rational(1), Rational(0)), a)])
        sets[(2 * j + 1, 1)] = Region.halfspaces([Halfspace((Rational(-1), Rational(0)), -b)])
    return kkm_vertex(M, P, sets)


def gale_solve(intervals: Sequence[Tuple], delta=None) -> Tuple[Dict[int, int], Witness]:
    """Returns {cover j: vertex index i} (a permutation) and the witness."""
    C = gale_cover(intervals)
    wit = solve(C, None, delta)
    choice = {w // 2: w % 2 for w in wit.basis}
    return choice, wit

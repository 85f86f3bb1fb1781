"""Exact rational helpers shared by every module."""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from operator import mul
from typing import Iterable, Sequence, Tuple, Union

from gmpy2 import mpq

# GMP rationals: same semantics, hashing and equality as Fraction, much faster.
Rational = mpq
Point = Tuple[Rational, ...]
RationalLike = Union[int, str, Fraction, Rational]


def Q(value: RationalLike) -> Rational:
    """Parse an int, Fraction or decimal/fraction string ("3/4", "0.25")."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Rational(value)
    if isinstance(value, Fraction):
        # a Fraction built from an mpq can hold mpz parts, which mpq() rejects
        return Rational(int(value.numerator), int(value.denominator))
    if isinstance(value, str):
        try:
            return Rational(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot read {value!r} as an exact rational") from None
    raise TypeError(f"cannot read {value!r} as an exact rational")


def point(coords: Iterable[RationalLike]) -> Point:
    return tuple(Q(c) for c in coords)


def fmt(x: Rational) -> str:
    return str(x)


def fmt_point(p: Sequence[Rational]) -> list:
    return [str(c) for c in p]


def dot(a: Sequence[Rational], b: Sequence[Rational]) -> Rational:
    return sum(map(mul, a, b), Rational(0))


def sub(a: Sequence[Rational], b: Sequence[Rational]) -> Point:
    return tuple(x - y for x, y in zip(a, b))


def add(a: Sequence[Rational], b: Sequence[Rational]) -> Point:
    return tuple(x + y for x, y in zip(a, b))


def scale(c: Rational, a: Sequence[Rational]) -> Point:
    return tuple(c * x for x in a)


def norm2(a: Sequence[Rational]) -> Rational:
    return dot(a, a)


def barycenter(points: Sequence[Sequence[Rational]]) -> Point:
    n = len(points)
    if n == 0:
        raise ValueError("barycenter of no points")
    return tuple(sum(col, Rational(0)) / n for col in zip(*points))


def sqrt_upper(x: Rational, denominator: int = 1 << 20) -> Rational:
    """Smallest multiple of 1/denominator that is >= sqrt(x); exact for perfect squares."""
    if x < 0:
        raise ValueError("negative argument")
    num, den = x.numerator, x.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Rational(rn, rd)
    # sqrt(num/den) <= m/denominator  <=>  num * denominator^2 <= m^2 * den
    target = num * denominator * denominator
    m = isqrt(target // den)
    while m * m * den < target:
        m += 1
    return Rational(m, denominator)


def solve_linear(rows: Sequence[Sequence[Rational]], rhs: Sequence[Rational]):
    """Solve A x = b exactly.

    Returns the unique solution as a tuple, or None when the system is
    inconsistent. Raises ValueError when the solution is not unique.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    aug = [list(rows[i]) + [rhs[i]] for i in range(m)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        pv = aug[r][c]
        aug[r] = [v / pv for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                fac = aug[i][c]
                aug[i] = [a - fac * b for a, b in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n] != 0:
            return None
    if len(pivots) < n:
        raise ValueError("underdetermined system")
    sol = [Rational(0)] * n
    for i, c in enumerate(pivots):
        sol[c] = aug[i][n]
    return tuple(sol)


def rank_of(rows: Sequence[Sequence[Rational]]) -> int:
    """Row rank over the rationals (plain Gaussian elimination)."""
    mat = [list(r) for r in rows]
    if not mat:
        return 0
    n = len(mat[0])
    rank = 0
    for c in range(n):
        piv = next((i for i in range(rank, len(mat)) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        for i in range(rank + 1, len(mat)):
            if mat[i][c] != 0:
                fac = mat[i][c] / mat[rank][c]
                mat[i] = [a - fac * b for a, b in zip(mat[i], mat[rank])]
        rank += 1
    return rank


def affine_rank(points: Sequence[Sequence[Rational]]) -> int:
    """Dimension of the affine hull (-1 for no points)."""
    if not points:
        return -1
    base = points[0]
    return rank_of([sub(p, base) for p in points[1:]])


def det(mat: Sequence[Sequence[Rational]]) -> Rational:
    a = [list(r) for r in mat]
    n = len(a)
    sign = 1
    result = Rational(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c] != 0), None)
        if piv is None:
            return Rational(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            sign = -sign
        result *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                fac = a[i][c] / a[c][c]
                a[i] = [x - fac * y for x, y in zip(a[i], a[c])]
    return sign * result

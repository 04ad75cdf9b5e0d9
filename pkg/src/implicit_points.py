"""
Implicit Points and Indirect Predicates.

This module provides:
- ExplicitPoint3: an input point given by three doubles
- LPIPoint: intersection of the line (p, q) with the plane (r, s, t)
- TPIPoint: intersection of three planes, each given by three points
- Indirect predicates (orient3d, orient2d, coordinate comparison) that take
  any mix of explicit and implicit points and never build their coordinates

Implicit points reference explicit input points only, never other implicit
points. Their homogeneous coordinates (X, W) are polynomials in the defining
coordinates and are evaluated lazily, first as intervals, then exactly.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Sequence, Tuple, Union

from src.numeric_kernel import (
    Expansion,
    IntervalScalar,
    Sign,
    det2,
    det3,
    orient2d,
    orient3d,
)

# Coordinate pairs used for the three axis-aligned projections
PROJECTIONS: Tuple[Tuple[int, int], ...] = ((0, 1), (1, 2), (2, 0))


class ExplicitPoint3(NamedTuple):
    x: float
    y: float
    z: float


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0])


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _lift(point: Sequence[float], num):
    return [num(c) for c in point]


def _sub(u, v):
    return [u[0] - v[0], u[1] - v[1], u[2] - v[2]]


def _plane_normal(r, s, t):
    return _cross(_sub(s, r), _sub(t, r))


def _as_explicit(point) -> ExplicitPoint3:
    if isinstance(point, ExplicitPoint3):
        return point
    if isinstance(point, (LPIPoint, TPIPoint)):
        raise TypeError("implicit points may only be defined by explicit points")
    return ExplicitPoint3(float(point[0]), float(point[1]), float(point[2]))


@dataclass(frozen=True)
class LPIPoint:
    """Line (p, q) intersected with plane (r, s, t)."""
    p: ExplicitPoint3
    q: ExplicitPoint3
    r: ExplicitPoint3
    s: ExplicitPoint3
    t: ExplicitPoint3

    def __post_init__(self):
        for name in ("p", "q", "r", "s", "t"):
            object.__setattr__(self, name, _as_explicit(getattr(self, name)))

    def homogeneous(self, num):
        p, q, r, s, t = (_lift(v, num) for v in (self.p, self.q, self.r, self.s, self.t))
        n = _plane_normal(r, s, t)
        qp = _sub(q, p)
        d = _dot(n, qp)
        lam = _dot(n, _sub(r, p))
        x = [p[i] * d + qp[i] * lam for i in range(3)]
        return x, d

    @cached_property
    def interval(self):
        return self.homogeneous(IntervalScalar.from_float)

    @cached_property
    def exact(self):
        return self.homogeneous(Expansion.from_float)

    def defining_points(self) -> Tuple[ExplicitPoint3, ...]:
        return (self.p, self.q, self.r, self.s, self.t)


@dataclass(frozen=True)
class TPIPoint:
    """Common point of the planes (r1, s1, t1), (r2, s2, t2), (r3, s3, t3)."""
    r1: ExplicitPoint3
    s1: ExplicitPoint3
    t1: ExplicitPoint3
    r2: ExplicitPoint3
    s2: ExplicitPoint3
    t2: ExplicitPoint3
    r3: ExplicitPoint3
    s3: ExplicitPoint3
    t3: ExplicitPoint3

    def __post_init__(self):
        for name in ("r1", "s1", "t1", "r2", "s2", "t2", "r3", "s3", "t3"):
            object.__setattr__(self, name, _as_explicit(getattr(self, name)))

    def homogeneous(self, num):
        pts = [_lift(v, num) for v in self.defining_points()]
        normals = [_plane_normal(*pts[3 * i:3 * i + 3]) for i in range(3)]
        offsets = [_dot(normals[i], pts[3 * i]) for i in range(3)]
        n1, n2, n3 = normals
        c23, c31, c12 = _cross(n2, n3), _cross(n3, n1), _cross(n1, n2)
        w = _dot(n1, c23)
        x = [offsets[0] * c23[i] + offsets[1] * c31[i] + offsets[2] * c12[i] for i in range(3)]
        return x, w

    @cached_property
    def interval(self):
        return self.homogeneous(IntervalScalar.from_float)

    @cached_property
    def exact(self):
        return self.homogeneous(Expansion.from_float)

    def defining_points(self) -> Tuple[ExplicitPoint3, ...]:
        return (self.r1, self.s1, self.t1, self.r2, self.s2, self.t2,
                self.r3, self.s3, self.t3)

    def planes(self) -> Tuple[Tuple[ExplicitPoint3, ...], ...]:
        pts = self.defining_points()
        return (pts[0:3], pts[3:6], pts[6:9])


GenericPoint = Union[ExplicitPoint3, LPIPoint, TPIPoint]

_INTERVAL_ONE = IntervalScalar(1.0)
_EXACT_ONE = Expansion.from_float(1.0)


def is_explicit(point: GenericPoint) -> bool:
    return not isinstance(point, (LPIPoint, TPIPoint))


def _interval_coords(point: GenericPoint):
    if is_explicit(point):
        return [IntervalScalar(c) for c in point], _INTERVAL_ONE
    return point.interval


def _exact_coords(point: GenericPoint):
    if is_explicit(point):
        return [Expansion.from_float(c) for c in point], _EXACT_ONE
    return point.exact


def _combined_sign(det_sign, weights) -> Sign:
    result = int(det_sign)
    for w in weights:
        result *= int(w)
    return Sign(result)


def _staged(evaluate) -> Sign:
    """Run ``evaluate`` with interval coordinates, then exactly if needed."""
    result = evaluate(_interval_coords)
    if result is not None:
        return result
    return evaluate(_exact_coords)


def orient3d_indirect(a: GenericPoint, b: GenericPoint, c: GenericPoint, d: GenericPoint) -> Sign:
    """orient3d on the exact coordinates of possibly implicit points."""
    if is_explicit(a) and is_explicit(b) and is_explicit(c) and is_explicit(d):
        return orient3d(a, b, c, d)

    def evaluate(coords):
        (xa, wa), (xb, wb), (xc, wc), (xd, wd) = (coords(p) for p in (a, b, c, d))
        w_signs = [w.sign() for w in (wa, wb, wc, wd)]
        if any(s is None for s in w_signs):
            return None
        rows = [[xi[k] * wd - xd[k] * wi for k in range(3)]
                for xi, wi in ((xa, wa), (xb, wb), (xc, wc))]
        det_sign = det3(*rows).sign()
        if det_sign is None:
            return None
        return _combined_sign(det_sign, w_signs)

    return _staged(evaluate)


def orient2d_indirect(a: GenericPoint, b: GenericPoint, c: GenericPoint,
                      axes: Tuple[int, int]) -> Sign:
    """orient2d of the projections of a, b, c on the coordinate pair ``axes``."""
    i, j = axes
    if is_explicit(a) and is_explicit(b) and is_explicit(c):
        return orient2d((a[i], a[j]), (b[i], b[j]), (c[i], c[j]))

    def evaluate(coords):
        (xa, wa), (xb, wb), (xc, wc) = (coords(p) for p in (a, b, c))
        w_signs = [w.sign() for w in (wa, wb)]
        if wc.sign() is None or any(s is None for s in w_signs):
            return None
        ra = [xa[k] * wc - xc[k] * wa for k in (i, j)]
        rb = [xb[k] * wc - xc[k] * wb for k in (i, j)]
        det_sign = det2(ra[0], ra[1], rb[0], rb[1]).sign()
        if det_sign is None:
            return None
        return _combined_sign(det_sign, w_signs)

    return _staged(evaluate)


def compare_coordinate(a: GenericPoint, b: GenericPoint, axis: int) -> Sign:
    """Sign of a[axis] - b[axis] on exact coordinates."""
    if is_explicit(a) and is_explicit(b):
        if a[axis] == b[axis]:
            return Sign.ZERO
        return Sign.POSITIVE if a[axis] > b[axis] else Sign.NEGATIVE

    def evaluate(coords):
        (xa, wa), (xb, wb) = coords(a), coords(b)
        w_signs = [wa.sign(), wb.sign()]
        if any(s is None for s in w_signs):
            return None
        det_sign = (xa[axis] * wb - xb[axis] * wa).sign()
        if det_sign is None:
            return None
        return _combined_sign(det_sign, w_signs)

    return _staged(evaluate)


def same_point(a: GenericPoint, b: GenericPoint) -> bool:
    """True iff a and b have the same exact coordinates."""
    if a is b:
        return True
    return all(compare_coordinate(a, b, axis) == Sign.ZERO for axis in range(3))


def weight_sign(point: GenericPoint) -> Sign:
    """Sign of the homogeneous weight; ZERO means the point does not exist."""
    if is_explicit(point):
        return Sign.POSITIVE
    sign = point.interval[1].sign()
    if sign is None:
        sign = point.exact[1].sign()
    return sign


def is_valid(point: GenericPoint) -> bool:
    """
    Existence check for implicit points.

    An LPI exists when its plane triplet is misaligned and the line is not
    parallel to the plane; a TPI exists when its three planes meet in a
    single point. Both reduce to a nonzero homogeneous weight.
    """
    return weight_sign(point) != Sign.ZERO


def exact_coordinates(point: GenericPoint) -> Tuple[Fraction, Fraction, Fraction]:
    """Rational coordinates of a point."""
    if is_explicit(point):
        return tuple(Fraction(c) for c in point)
    x, w = point.exact
    wf = sum((Fraction(t) for t in w.terms), Fraction(0))
    return tuple(sum((Fraction(t) for t in xi.terms), Fraction(0)) / wf for xi in x)


def approximate(point: GenericPoint) -> ExplicitPoint3:
    """
    Nearest double triplet of the exact coordinates.

    Raises:
        OverflowError: If a coordinate exceeds the double range
        ZeroDivisionError: If the implicit point does not exist
    """
    if is_explicit(point):
        return ExplicitPoint3(float(point[0]), float(point[1]), float(point[2]))
    return ExplicitPoint3(*(float(c) for c in exact_coordinates(point)))

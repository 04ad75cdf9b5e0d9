"""
Derived Geometric Predicates.

This module provides point/segment/triangle predicates composed from the
base predicates. Every function accepts explicit and implicit points.

Coplanarity prechecks are the caller's job: inner_segments_cross expects
four coplanar points, the triangle predicates expect p on the triangle plane.
"""

from typing import Sequence, Tuple

from src.implicit_points import (
    PROJECTIONS,
    GenericPoint,
    approximate,
    compare_coordinate,
    orient2d_indirect,
    orient3d_indirect,
    same_point,
)
from src.numeric_kernel import Sign

Triangle = Sequence[GenericPoint]


def misaligned(p1: GenericPoint, p2: GenericPoint, p3: GenericPoint) -> bool:
    """True if the three points are not collinear."""
    return any(orient2d_indirect(p1, p2, p3, axes) != Sign.ZERO for axes in PROJECTIONS)


def point_in_inner_segment(p: GenericPoint, v1: GenericPoint, v2: GenericPoint) -> bool:
    """True if p lies in the open segment (v1, v2)."""
    if misaligned(p, v1, v2):
        return False
    for axis in range(3):
        before = compare_coordinate(v1, p, axis)
        after = compare_coordinate(p, v2, axis)
        if before != Sign.ZERO and before == after:
            return True
    return False


def point_in_segment(p: GenericPoint, v1: GenericPoint, v2: GenericPoint) -> bool:
    """True if p lies in the closed segment [v1, v2]."""
    return (same_point(p, v1) or same_point(p, v2)
            or point_in_inner_segment(p, v1, v2))


def inner_segments_cross(a: GenericPoint, b: GenericPoint,
                         p: GenericPoint, q: GenericPoint) -> bool:
    """True if the interiors of the coplanar segments (a, b) and (p, q) cross."""
    for axes in PROJECTIONS:
        o_pab = orient2d_indirect(p, a, b, axes)
        o_qba = orient2d_indirect(q, b, a, axes)
        o_apq = orient2d_indirect(a, p, q, axes)
        o_bqp = orient2d_indirect(b, q, p, axes)
        if not (o_pab or o_qba or o_apq or o_bqp):
            continue
        if o_pab == o_qba and o_apq == o_bqp:
            return True
    return False


def point_in_inner_triangle(p: GenericPoint, v1: GenericPoint,
                            v2: GenericPoint, v3: GenericPoint) -> bool:
    """True if the coplanar point p lies in the open triangle (v1, v2, v3)."""
    for axes in PROJECTIONS:
        reference = orient2d_indirect(v1, v2, v3, axes)
        if (orient2d_indirect(p, v1, v2, axes) != reference
                or orient2d_indirect(p, v2, v3, axes) != reference
                or orient2d_indirect(p, v3, v1, axes) != reference):
            return False
    return True


def point_in_triangle(p: GenericPoint, v1: GenericPoint,
                      v2: GenericPoint, v3: GenericPoint) -> bool:
    """Closed variant of point_in_inner_triangle."""
    return (point_in_inner_triangle(p, v1, v2, v3)
            or point_in_segment(p, v1, v2)
            or point_in_segment(p, v2, v3)
            or point_in_segment(p, v3, v1))


def inner_segment_crosses_inner_triangle(u1: GenericPoint, u2: GenericPoint, v1: GenericPoint,
                                         v2: GenericPoint, v3: GenericPoint) -> bool:
    """True if the open segment (u1, u2) pierces the open triangle (v1, v2, v3)."""
    s1 = orient3d_indirect(u1, v1, v2, v3)
    s2 = orient3d_indirect(u2, v1, v2, v3)
    if s1 == Sign.ZERO or s2 == Sign.ZERO or s1 == s2:
        return False
    w1 = orient3d_indirect(u1, u2, v1, v2)
    if w1 == Sign.ZERO:
        return False
    return (orient3d_indirect(u1, u2, v2, v3) == w1
            and orient3d_indirect(u1, u2, v3, v1) == w1)


def inner_segment_crosses_triangle(u1: GenericPoint, u2: GenericPoint, v1: GenericPoint,
                                   v2: GenericPoint, v3: GenericPoint) -> bool:
    """True if the open segment (u1, u2) meets the closed, non-coplanar triangle."""
    if inner_segment_crosses_inner_triangle(u1, u2, v1, v2, v3):
        return True
    if any(point_in_inner_segment(v, u1, u2) for v in (v1, v2, v3)):
        return True
    for a, b in ((v1, v2), (v2, v3), (v3, v1)):
        if orient3d_indirect(u1, u2, a, b) == Sign.ZERO and inner_segments_cross(u1, u2, a, b):
            return True
    return False


def projection_axes(v1: GenericPoint, v2: GenericPoint, v3: GenericPoint) -> Tuple[int, int]:
    """
    Coordinate pair on which the triangle projects to a non-degenerate triangle.

    The dropped coordinate is the largest component of the approximate normal;
    the choice is confirmed with an exact orient2d.

    Raises:
        ValueError: If the triangle is degenerate
    """
    a, b, c = (approximate(v) for v in (v1, v2, v3))
    u = (b[0] - a[0], b[1] - a[1], b[2] - a[2])
    w = (c[0] - a[0], c[1] - a[1], c[2] - a[2])
    normal = (abs(u[1] * w[2] - u[2] * w[1]),
              abs(u[2] * w[0] - u[0] * w[2]),
              abs(u[0] * w[1] - u[1] * w[0]))
    dropped = max(range(3), key=lambda k: normal[k])
    preferred = {2: (0, 1), 0: (1, 2), 1: (2, 0)}[dropped]
    for axes in (preferred,) + tuple(ax for ax in PROJECTIONS if ax != preferred):
        if orient2d_indirect(v1, v2, v3, axes) != Sign.ZERO:
            return axes
    raise ValueError("degenerate triangle has no valid projection")


def _separated_by_edges(first: Triangle, second: Sequence[GenericPoint],
                        axes: Tuple[int, int]) -> bool:
    """True if an edge line of ``first`` keeps ``second`` on its closed outer side."""
    reference = orient2d_indirect(first[0], first[1], first[2], axes)
    for i in range(3):
        a, b = first[i], first[(i + 1) % 3]
        if all(orient2d_indirect(a, b, x, axes) != reference for x in second):
            return True
    return False


def coplanar_triangles_overlap(t: Triangle, c: Triangle) -> bool:
    """True if two coplanar non-degenerate triangles overlap with positive area."""
    axes = projection_axes(*c)
    if _separated_by_edges(t, c, axes) or _separated_by_edges(c, t, axes):
        return False
    return True


def segment_meets_open_triangle(p: GenericPoint, q: GenericPoint, c: Triangle) -> bool:
    """True if the closed segment [p, q] meets the relative interior of triangle c."""
    c1, c2, c3 = c
    sp = orient3d_indirect(p, c1, c2, c3)
    sq = orient3d_indirect(q, c1, c2, c3)
    if sp == Sign.ZERO and sq == Sign.ZERO:
        if same_point(p, q):
            return point_in_inner_triangle(p, c1, c2, c3)
        axes = projection_axes(c1, c2, c3)
        if _separated_by_edges(c, (p, q), axes):
            return False
        sides = {orient2d_indirect(p, q, x, axes) for x in c}
        return Sign.POSITIVE in sides and Sign.NEGATIVE in sides
    if sp == sq:
        return False
    if sp == Sign.ZERO:
        return point_in_inner_triangle(p, c1, c2, c3)
    if sq == Sign.ZERO:
        return point_in_inner_triangle(q, c1, c2, c3)
    return inner_segment_crosses_inner_triangle(p, q, c1, c2, c3)

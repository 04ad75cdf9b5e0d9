"""
Rational reference implementations used only by the tests.

Every function works on fractions.Fraction, so results are exact.
"""

from fractions import Fraction
from typing import Sequence, Tuple

QPoint = Tuple[Fraction, Fraction, Fraction]


def q(point: Sequence[float]) -> QPoint:
    return tuple(Fraction(c) for c in point)


def sign(value) -> int:
    return (value > 0) - (value < 0)


def sub(u, v):
    return [u[i] - v[i] for i in range(len(u))]


def cross(u, v):
    return [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]


def dot(u, v):
    return sum(u[i] * v[i] for i in range(len(u)))


def det3(r0, r1, r2):
    return dot(r0, cross(r1, r2))


def det4(rows):
    total = Fraction(0)
    for col in range(4):
        minor = [[r[k] for k in range(4) if k != col] for r in rows[1:]]
        total += (-1) ** col * rows[0][col] * det3(*minor)
    return total


def orient2d(a, b, c) -> int:
    a, b, c = q(a), q(b), q(c)
    return sign((a[0] - c[0]) * (b[1] - c[1]) - (a[1] - c[1]) * (b[0] - c[0]))


def orient3d(a, b, c, d) -> int:
    a, b, c, d = q(a), q(b), q(c), q(d)
    return sign(det3(sub(a, d), sub(b, d), sub(c, d)))


def insphere(a, b, c, d, e) -> int:
    e = q(e)
    rows = []
    for p in (a, b, c, d):
        r = sub(q(p), e)
        rows.append(r + [dot(r, r)])
    return sign(det4(rows))


def lpi(p, q_, r, s, t) -> QPoint:
    """Exact intersection of line (p, q_) with plane (r, s, t)."""
    p, q_, r, s, t = (q(v) for v in (p, q_, r, s, t))
    n = cross(sub(s, r), sub(t, r))
    direction = sub(q_, p)
    lam = dot(n, sub(r, p)) / dot(n, direction)
    return tuple(p[i] + lam * direction[i] for i in range(3))


def tpi(*pts) -> QPoint:
    """Exact common point of three planes given by nine points."""
    pts = [q(v) for v in pts]
    normals = [cross(sub(pts[3 * i + 1], pts[3 * i]), sub(pts[3 * i + 2], pts[3 * i])) for i in range(3)]
    offsets = [dot(normals[i], pts[3 * i]) for i in range(3)]
    w = det3(*normals)
    result = []
    for k in range(3):
        rows = [list(n) for n in normals]
        for i in range(3):
            rows[i][k] = offsets[i]
        result.append(det3(*rows) / w)
    return tuple(result)


def point_in_triangle_closed(p, a, b, c) -> bool:
    """Coplanar closed point-in-triangle via barycentric signs on the best projection."""
    a, b, c, p = q(a), q(b), q(c), q(p)
    n = cross(sub(b, a), sub(c, a))
    drop = max(range(3), key=lambda k: abs(n[k]))
    keep = [k for k in range(3) if k != drop]

    def o2(u, v, w):
        return sign((u[keep[0]] - w[keep[0]]) * (v[keep[1]] - w[keep[1]])
                    - (u[keep[1]] - w[keep[1]]) * (v[keep[0]] - w[keep[0]]))

    ref = o2(a, b, c)
    sides = [o2(a, b, p), o2(b, c, p), o2(c, a, p)]
    return all(s == ref or s == 0 for s in sides)


def tet_volume(a, b, c, d) -> Fraction:
    a, b, c, d = q(a), q(b), q(c), q(d)
    return abs(det3(sub(b, a), sub(c, a), sub(d, a))) / 6


def inner_segments_cross(a, b, p, q_) -> bool:
    """Coplanar open segments meet in a single point interior to both."""
    a, b, p, q_ = (q(v) for v in (a, b, p, q_))
    d1, d2, r = sub(b, a), sub(q_, p), sub(p, a)
    n = cross(d1, d2)
    nn = dot(n, n)
    if nn == 0:
        return False
    s = dot(cross(r, d2), n) / nn
    t = dot(cross(r, d1), n) / nn
    return 0 < s < 1 and 0 < t < 1


def inner_segment_crosses_triangle(u1, u2, v1, v2, v3) -> bool:
    """Open segment with endpoints off the plane meets the closed triangle."""
    s1, s2 = orient3d(u1, v1, v2, v3), orient3d(u2, v1, v2, v3)
    if s1 == 0 or s2 == 0 or s1 == s2:
        return False
    u1, u2, v1 = q(u1), q(u2), q(v1)
    n = cross(sub(q(v2), v1), sub(q(v3), v1))
    direction = sub(u2, u1)
    lam = dot(n, sub(v1, u1)) / dot(n, direction)
    x = tuple(u1[i] + lam * direction[i] for i in range(3))
    return point_in_triangle_closed(x, v1, v2, v3)


def _side(a, b, p):
    return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])


def _double_area(poly):
    return sum(poly[i - 1][0] * poly[i][1] - poly[i][0] * poly[i - 1][1] for i in range(len(poly)))


def _clip(poly, a, b):
    """Part of a convex polygon on the closed left side of line (a, b)."""
    out = []
    for i in range(len(poly)):
        prev, cur = poly[i - 1], poly[i]
        sp, sc = _side(a, b, prev), _side(a, b, cur)
        if (sp >= 0) != (sc >= 0):
            lam = sp / (sp - sc)
            out.append((prev[0] + lam * (cur[0] - prev[0]), prev[1] + lam * (cur[1] - prev[1])))
        if sc >= 0:
            out.append(cur)
    return out


def coplanar_overlap_area(t, c) -> Fraction:
    """Projected area of the intersection of two coplanar triangles (zero iff no positive-area overlap)."""
    t, c = [q(v) for v in t], [q(v) for v in c]
    n = cross(sub(c[1], c[0]), sub(c[2], c[0]))
    drop = max(range(3), key=lambda k: abs(n[k]))
    keep = [k for k in range(3) if k != drop]
    poly = [(v[keep[0]], v[keep[1]]) for v in t]
    window = [(v[keep[0]], v[keep[1]]) for v in c]
    if _double_area(window) < 0:
        window.reverse()
    for i in range(3):
        poly = _clip(poly, window[i], window[(i + 1) % 3])
        if not poly:
            return Fraction(0)
    return abs(_double_area(poly)) / 2

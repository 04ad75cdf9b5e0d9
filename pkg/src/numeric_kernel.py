"""
Numeric Kernel for the polyhedral meshing pipeline.

This module provides:
- Error-free transformations on IEEE-754 doubles (two_sum, two_product, ...)
- Expansion: exact sums of nonoverlapping doubles with + - * operators
- IntervalScalar: outward-rounded interval arithmetic used as a filter
- Certified base predicates: orient2d, orient3d, insphere, coincident points

Every predicate runs in three stages: a static forward-error filter, an
interval pass, and the exact expansion evaluation. The first stage that can
certify the sign answers.
"""

import math
from enum import IntEnum
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

Point2 = Sequence[float]
Point3 = Sequence[float]


def _machine_constants() -> Tuple[float, float]:
    """Compute epsilon (half ulp of 1.0) and the Dekker splitter."""
    every_other = True
    half = 0.5
    epsilon = 1.0
    splitter = 1.0
    check = 1.0
    while True:
        lastcheck = check
        epsilon *= half
        if every_other:
            splitter *= 2.0
        every_other = not every_other
        check = 1.0 + epsilon
        if not (check != 1.0 and check != lastcheck):
            break
    return epsilon, splitter + 1.0


EPSILON, SPLITTER = _machine_constants()

# Forward error bounds for the static filters
CCW_ERRBOUND_A = (3.0 + 16.0 * EPSILON) * EPSILON
O3D_ERRBOUND_A = (7.0 + 56.0 * EPSILON) * EPSILON
ISP_ERRBOUND_A = (16.0 + 224.0 * EPSILON) * EPSILON


class Sign(IntEnum):
    """Certified sign of an exact expression."""
    NEGATIVE = -1
    ZERO = 0
    POSITIVE = 1


def sign_of(value: float) -> Sign:
    if value > 0.0:
        return Sign.POSITIVE
    if value < 0.0:
        return Sign.NEGATIVE
    return Sign.ZERO


# ---------------------------------------------------------------------------
# Error-free transformations
# ---------------------------------------------------------------------------

def fast_two_sum(a: float, b: float) -> Tuple[float, float]:
    """x + y == a + b exactly, assuming |a| >= |b|."""
    x = a + b
    bvirt = x - a
    y = b - bvirt
    return x, y


def two_sum(a: float, b: float) -> Tuple[float, float]:
    x = a + b
    bvirt = x - a
    avirt = x - bvirt
    bround = b - bvirt
    around = a - avirt
    return x, around + bround


def two_diff(a: float, b: float) -> Tuple[float, float]:
    x = a - b
    bvirt = a - x
    avirt = x + bvirt
    bround = bvirt - b
    around = a - avirt
    return x, around + bround


def split(a: float) -> Tuple[float, float]:
    c = SPLITTER * a
    abig = c - a
    ahi = c - abig
    alo = a - ahi
    return ahi, alo


def _two_product_presplit(a: float, b: float, bhi: float, blo: float) -> Tuple[float, float]:
    x = a * b
    ahi, alo = split(a)
    err1 = x - (ahi * bhi)
    err2 = err1 - (alo * bhi)
    err3 = err2 - (ahi * blo)
    return x, (alo * blo) - err3


def two_product(a: float, b: float) -> Tuple[float, float]:
    """x + y == a * b exactly."""
    bhi, blo = split(b)
    return _two_product_presplit(a, b, bhi, blo)


# ---------------------------------------------------------------------------
# Expansion arithmetic (zero-eliminating variants)
# ---------------------------------------------------------------------------

def grow_expansion(e: Sequence[float], b: float) -> List[float]:
    h = []
    q = b
    for enow in e:
        q, hh = two_sum(q, enow)
        if hh != 0.0:
            h.append(hh)
    if q != 0.0 or not h:
        h.append(q)
    return h


def expansion_sum(e: Sequence[float], f: Sequence[float]) -> List[float]:
    """Sum of two expansions; components merged by increasing magnitude."""
    g = sorted([t for t in e if t != 0.0] + [t for t in f if t != 0.0], key=abs)
    if not g:
        return [0.0]
    h = []
    q = g[0]
    for gnow in g[1:]:
        q, hh = two_sum(q, gnow)
        if hh != 0.0:
            h.append(hh)
    if q != 0.0 or not h:
        h.append(q)
    return h


def scale_expansion(e: Sequence[float], b: float) -> List[float]:
    if b == 0.0:
        return [0.0]
    bhi, blo = split(b)
    q, hh = _two_product_presplit(e[0], b, bhi, blo)
    h = [hh] if hh != 0.0 else []
    for enow in e[1:]:
        product1, product0 = _two_product_presplit(enow, b, bhi, blo)
        total, hh = two_sum(q, product0)
        if hh != 0.0:
            h.append(hh)
        q, hh = fast_two_sum(product1, total)
        if hh != 0.0:
            h.append(hh)
    if q != 0.0 or not h:
        h.append(q)
    return h


def compress(e: Sequence[float]) -> List[float]:
    """Shorten an expansion without changing its value."""
    m = len(e)
    if m == 0:
        return [0.0]
    g = list(e)
    bottom = m - 1
    q = e[bottom]
    for index in range(m - 2, -1, -1):
        qnew, small = fast_two_sum(q, e[index])
        if small != 0.0:
            g[bottom] = qnew
            bottom -= 1
            q = small
        else:
            q = qnew
    h = []
    for index in range(bottom + 1, m):
        qnew, small = fast_two_sum(g[index], q)
        if small != 0.0:
            h.append(small)
        q = qnew
    h.append(q)
    return h


class Expansion:
    """
    Exact real number stored as a sum of nonoverlapping doubles.

    Terms are kept in increasing order of magnitude, so the sign of the whole
    sum is the sign of the last term.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[float] = (0.0,)):
        terms = tuple(terms)
        self.terms = terms if terms else (0.0,)

    @classmethod
    def from_float(cls, value: float) -> "Expansion":
        return cls((value,))

    @classmethod
    def from_diff(cls, a: float, b: float) -> "Expansion":
        x, y = two_diff(a, b)
        return cls((y, x) if y != 0.0 else (x,))

    @classmethod
    def from_product(cls, a: float, b: float) -> "Expansion":
        x, y = two_product(a, b)
        return cls((y, x) if y != 0.0 else (x,))

    @staticmethod
    def _coerce(other) -> "Expansion":
        if isinstance(other, Expansion):
            return other
        return Expansion((float(other),))

    def __add__(self, other) -> "Expansion":
        other = self._coerce(other)
        if len(other.terms) == 1:
            return Expansion(grow_expansion(self.terms, other.terms[0]))
        return Expansion(expansion_sum(self.terms, other.terms))

    __radd__ = __add__

    def __neg__(self) -> "Expansion":
        return Expansion(-t for t in self.terms)

    def __sub__(self, other) -> "Expansion":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Expansion":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "Expansion":
        other = self._coerce(other)
        if len(other.terms) > len(self.terms):
            return other * self
        acc: List[float] = [0.0]
        for t in other.terms:
            if t == 0.0:
                continue
            acc = expansion_sum(acc, scale_expansion(self.terms, t))
        if len(acc) > 8:
            acc = compress(acc)
        return Expansion(acc)

    __rmul__ = __mul__

    def sign(self) -> Sign:
        return sign_of(self.terms[-1])

    def estimate(self) -> float:
        """Correctly rounded value of the sum."""
        return math.fsum(self.terms)

    def compress(self) -> "Expansion":
        return Expansion(compress(self.terms))

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"Expansion({list(self.terms)!r})"


# ---------------------------------------------------------------------------
# Interval arithmetic
# ---------------------------------------------------------------------------

_INF = math.inf


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


class IntervalScalar:
    """Closed interval [lo, hi] that always contains the tracked exact value."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: float, hi: Optional[float] = None):
        if hi is None:
            hi = lo
        if math.isnan(lo) or math.isnan(hi):
            lo, hi = -_INF, _INF
        self.lo = lo
        self.hi = hi

    @classmethod
    def from_float(cls, value: float) -> "IntervalScalar":
        return cls(value, value)

    @staticmethod
    def _coerce(other) -> "IntervalScalar":
        if isinstance(other, IntervalScalar):
            return other
        return IntervalScalar(float(other))

    def __add__(self, other) -> "IntervalScalar":
        other = self._coerce(other)
        return IntervalScalar(_down(self.lo + other.lo), _up(self.hi + other.hi))

    __radd__ = __add__

    def __neg__(self) -> "IntervalScalar":
        return IntervalScalar(-self.hi, -self.lo)

    def __sub__(self, other) -> "IntervalScalar":
        other = self._coerce(other)
        return IntervalScalar(_down(self.lo - other.hi), _up(self.hi - other.lo))

    def __rsub__(self, other) -> "IntervalScalar":
        return self._coerce(other) - self

    def __mul__(self, other) -> "IntervalScalar":
        other = self._coerce(other)
        products = (self.lo * other.lo, self.lo * other.hi,
                    self.hi * other.lo, self.hi * other.hi)
        if any(math.isnan(p) for p in products):
            return IntervalScalar(-_INF, _INF)
        return IntervalScalar(_down(min(products)), _up(max(products)))

    __rmul__ = __mul__

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def sign(self) -> Optional[Sign]:
        """Certified sign, or None when zero lies inside the interval."""
        if self.lo > 0.0:
            return Sign.POSITIVE
        if self.hi < 0.0:
            return Sign.NEGATIVE
        return None

    def __repr__(self) -> str:
        return f"IntervalScalar({self.lo!r}, {self.hi!r})"


def interval_diff(a: float, b: float) -> IntervalScalar:
    return IntervalScalar(_down(a - b), _up(a - b)) if a != b else IntervalScalar(0.0)


# ---------------------------------------------------------------------------
# Generic determinants (work on float, IntervalScalar and Expansion)
# ---------------------------------------------------------------------------

def det2(a0, a1, b0, b1):
    return a0 * b1 - a1 * b0


def det3(r0: Sequence, r1: Sequence, r2: Sequence):
    return (r0[0] * (r1[1] * r2[2] - r1[2] * r2[1])
            + r1[0] * (r2[1] * r0[2] - r2[2] * r0[1])
            + r2[0] * (r0[1] * r1[2] - r0[2] * r1[1]))


def _orient3d_core(a: Point3, b: Point3, c: Point3, d: Point3, diff: Callable):
    ad = [diff(a[i], d[i]) for i in range(3)]
    bd = [diff(b[i], d[i]) for i in range(3)]
    cd = [diff(c[i], d[i]) for i in range(3)]
    return det3(ad, bd, cd)


def _orient2d_core(a: Point2, b: Point2, c: Point2, diff: Callable):
    return det2(diff(a[0], c[0]), diff(a[1], c[1]), diff(b[0], c[0]), diff(b[1], c[1]))


def _insphere_core(a: Point3, b: Point3, c: Point3, d: Point3, e: Point3, diff: Callable):
    aex, aey, aez = (diff(a[i], e[i]) for i in range(3))
    bex, bey, bez = (diff(b[i], e[i]) for i in range(3))
    cex, cey, cez = (diff(c[i], e[i]) for i in range(3))
    dex, dey, dez = (diff(d[i], e[i]) for i in range(3))

    ab = aex * bey - bex * aey
    bc = bex * cey - cex * bey
    cd = cex * dey - dex * cey
    da = dex * aey - aex * dey
    ac = aex * cey - cex * aey
    bd = bex * dey - dex * bey

    abc = aez * bc - bez * ac + cez * ab
    bcd = bez * cd - cez * bd + dez * bc
    cda = cez * da + dez * ac + aez * cd
    dab = dez * ab + aez * bd + bez * da

    alift = aex * aex + aey * aey + aez * aez
    blift = bex * bex + bey * bey + bez * bez
    clift = cex * cex + cey * cey + cez * cez
    dlift = dex * dex + dey * dey + dez * dez

    return (dlift * abc - clift * dab) + (blift * cda - alift * bcd)


# ---------------------------------------------------------------------------
# Predicates
# ---------------------------------------------------------------------------

def orient2d_filtered(a: Point2, b: Point2, c: Point2) -> Optional[Sign]:
    """Static filter stage of orient2d; None when it cannot decide."""
    detleft = (a[0] - c[0]) * (b[1] - c[1])
    detright = (a[1] - c[1]) * (b[0] - c[0])
    det = detleft - detright

    if detleft > 0.0:
        if detright <= 0.0:
            return sign_of(det)
        detsum = detleft + detright
    elif detleft < 0.0:
        if detright >= 0.0:
            return sign_of(det)
        detsum = -detleft - detright
    else:
        return sign_of(det)

    errbound = CCW_ERRBOUND_A * detsum
    if det >= errbound or -det >= errbound:
        return sign_of(det)
    return None


def orient2d_exact(a: Point2, b: Point2, c: Point2) -> Sign:
    return _orient2d_core(a, b, c, Expansion.from_diff).sign()


def orient2d(a: Point2, b: Point2, c: Point2) -> Sign:
    """
    Orientation of three 2D points.

    Returns:
        POSITIVE if a, b, c are counterclockwise, NEGATIVE if clockwise,
        ZERO if collinear.
    """
    result = orient2d_filtered(a, b, c)
    if result is not None:
        return result
    result = _orient2d_core(a, b, c, interval_diff).sign()
    if result is not None:
        return result
    return orient2d_exact(a, b, c)


def orient3d_filtered(a: Point3, b: Point3, c: Point3, d: Point3) -> Optional[Sign]:
    """Static filter stage of orient3d; None when it cannot decide."""
    adx, ady, adz = a[0] - d[0], a[1] - d[1], a[2] - d[2]
    bdx, bdy, bdz = b[0] - d[0], b[1] - d[1], b[2] - d[2]
    cdx, cdy, cdz = c[0] - d[0], c[1] - d[1], c[2] - d[2]

    bdxcdy = bdx * cdy
    cdxbdy = cdx * bdy
    cdxady = cdx * ady
    adxcdy = adx * cdy
    adxbdy = adx * bdy
    bdxady = bdx * ady

    det = (adz * (bdxcdy - cdxbdy)
           + bdz * (cdxady - adxcdy)
           + cdz * (adxbdy - bdxady))
    permanent = ((abs(bdxcdy) + abs(cdxbdy)) * abs(adz)
                 + (abs(cdxady) + abs(adxcdy)) * abs(bdz)
                 + (abs(adxbdy) + abs(bdxady)) * abs(cdz))
    errbound = O3D_ERRBOUND_A * permanent
    if det > errbound or -det > errbound:
        return sign_of(det)
    return None


def orient3d_exact(a: Point3, b: Point3, c: Point3, d: Point3) -> Sign:
    return _orient3d_core(a, b, c, d, Expansion.from_diff).sign()


def orient3d(a: Point3, b: Point3, c: Point3, d: Point3) -> Sign:
    """
    Sign of det[a-d; b-d; c-d].

    NEGATIVE when d lies above the plane of a, b, c seen counterclockwise,
    so orient3d((0,0,0), (1,0,0), (0,1,0), (0,0,1)) is NEGATIVE.
    """
    result = orient3d_filtered(a, b, c, d)
    if result is not None:
        return result
    result = _orient3d_core(a, b, c, d, interval_diff).sign()
    if result is not None:
        return result
    return orient3d_exact(a, b, c, d)


def insphere_exact(a: Point3, b: Point3, c: Point3, d: Point3, e: Point3) -> Sign:
    return _insphere_core(a, b, c, d, e, Expansion.from_diff).sign()


def insphere(a: Point3, b: Point3, c: Point3, d: Point3, e: Point3) -> Sign:
    """
    POSITIVE if e lies strictly inside the sphere through a, b, c, d, given
    orient3d(a, b, c, d) > 0; NEGATIVE outside; ZERO when cospherical.
    """
    result = _insphere_core(a, b, c, d, e, interval_diff).sign()
    if result is not None:
        return result
    return insphere_exact(a, b, c, d, e)


def coincident_points_2d(a: Point2, b: Point2) -> bool:
    return a[0] == b[0] and a[1] == b[1]


def coincident_points_3d(a: Point3, b: Point3) -> bool:
    return a[0] == b[0] and a[1] == b[1] and a[2] == b[2]

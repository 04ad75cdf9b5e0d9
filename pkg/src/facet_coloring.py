"""
Facet Coloring.

This module provides:
- finalize_grey_facets(): turn every GREY facet BLACK or WHITE
- fast_barycenter_test(): certified barycenter shortcut
- slow_exact_test(): boundary witness test, always conclusive
- covering_constraints(): input constraints overlapping a facet interior

A grey facet is either covered by the union of its coplanar constraints or
interior-disjoint from it. The tests below only have to tell the two apart.
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

from tqdm import tqdm

from src.bsp_complex import BSPComplex, FacetColor
from src.constraint_processing import Origin, pin_it, pin_t
from src.geometry_predicates import inner_segments_cross, point_in_inner_segment, projection_axes
from src.implicit_points import ExplicitPoint3, GenericPoint, orient2d_indirect, same_point
from src.logger import attach_to_log
from src.numeric_kernel import Sign

logger = attach_to_log(__name__)


@dataclass
class ColoringStats:
    fast: int = 0
    slow: int = 0
    vertex_rule: int = 0
    black: int = 0
    white: int = 0


def _loop_points(complex_: BSPComplex, f: int) -> List[GenericPoint]:
    return [complex_.point(v) for v in complex_.facet_vertices(f)]


def _witnesses(loop: Sequence[GenericPoint], vertex_ids: Sequence[int],
               c: Sequence[GenericPoint], c_ids: Sequence[int]) -> Dict[Hashable, FrozenSet[int]]:
    """
    Points of the facet boundary lying on the boundary of c.

    Each witness maps to the set of c edges (0, 1, 2 for c1c2, c2c3, c3c1)
    that contain it. Facet vertices and c corners are keyed by vertex id,
    edge/edge crossings by the pair of edges.
    """
    c_edges = [(c[i], c[(i + 1) % 3]) for i in range(3)]
    found: Dict[Hashable, FrozenSet[int]] = {}

    for v, p in zip(vertex_ids, loop):
        on = frozenset(i for i, (a, b) in enumerate(c_edges)
                       if same_point(p, a) or same_point(p, b) or point_in_inner_segment(p, a, b))
        if on:
            found[("v", v)] = on

    n = len(loop)
    for k, corner in enumerate(c):
        key = ("v", c_ids[k])
        if key in found:
            continue
        if any(point_in_inner_segment(corner, loop[i], loop[(i + 1) % n]) for i in range(n)):
            found[key] = frozenset((k, (k - 1) % 3))

    for i in range(n):
        a, b = loop[i], loop[(i + 1) % n]
        for j, (u, w) in enumerate(c_edges):
            if inner_segments_cross(a, b, u, w):
                found[("x", i, j)] = frozenset((j,))
    return found


def _three_misaligned(witnesses: Dict[Hashable, FrozenSet[int]]) -> bool:
    """True if three witnesses do not share a common edge of c."""
    for trio in combinations(witnesses.values(), 3):
        if not (trio[0] & trio[1] & trio[2]):
            return True
    return False


def constraint_overlaps_facet(complex_: BSPComplex, f: int, cid: int) -> bool:
    """Exact test: does the interior of coplanar constraint cid meet the facet interior?"""
    c = complex_.constraint_points(cid)
    vertex_ids = complex_.facet_vertices(f)
    loop = [complex_.point(v) for v in vertex_ids]
    if any(pin_it(p, c) for p in loop):
        return True
    return _three_misaligned(_witnesses(loop, vertex_ids, c, complex_.constraints[cid].vertices))


def _certified_barycenter(complex_: BSPComplex, f: int) -> Optional[Tuple[ExplicitPoint3, Tuple[int, int]]]:
    """Rounded barycenter and projection, if the projection is strictly inside the facet."""
    vertex_ids = complex_.facet_vertices(f)
    approx = [complex_.approx_point(v) for v in vertex_ids]
    n = float(len(approx))
    center = ExplicitPoint3(*(sum(p[k] for p in approx) / n for k in range(3)))
    axes = projection_axes(*complex_.plane_points(complex_.facets[f].plane))
    loop = [complex_.point(v) for v in vertex_ids]
    reference = complex_.loop_orientation(f, axes)
    if reference == Sign.ZERO:
        return None
    for i in range(len(loop)):
        if orient2d_indirect(loop[i], loop[(i + 1) % len(loop)], center, axes) != reference:
            return None
    return center, axes


def _barycenter(complex_: BSPComplex, f: int, centers: Optional[Dict[int, Optional[tuple]]]):
    if centers is None:
        return _certified_barycenter(complex_, f)
    if f not in centers:
        centers[f] = _certified_barycenter(complex_, f)
    return centers[f]


def _in_closed_projection(p: GenericPoint, c: Sequence[GenericPoint], axes: Tuple[int, int]) -> bool:
    reference = orient2d_indirect(c[0], c[1], c[2], axes)
    return all(orient2d_indirect(c[i], c[(i + 1) % 3], p, axes) in (reference, Sign.ZERO)
               for i in range(3))


def fast_barycenter_test(complex_: BSPComplex, f: int, constraint_ids: Sequence[int],
                         centers: Optional[Dict[int, Optional[tuple]]] = None) -> Optional[FacetColor]:
    """
    Color from the rounded facet barycenter.

    The barycenter is only used once its projection on the facet plane is
    certified to be strictly inside the facet; otherwise the test is
    inconclusive and returns None. ``centers`` memoizes barycenters by facet.
    """
    certified = _barycenter(complex_, f, centers)
    if certified is None:
        return None
    center, axes = certified
    for cid in constraint_ids:
        if _in_closed_projection(center, complex_.constraint_points(cid), axes):
            return FacetColor.BLACK
    return FacetColor.WHITE


def slow_exact_test(complex_: BSPComplex, f: int, constraint_ids: Sequence[int]) -> FacetColor:
    """BLACK iff some constraint overlaps the facet interior."""
    if any(constraint_overlaps_facet(complex_, f, cid) for cid in constraint_ids):
        return FacetColor.BLACK
    return FacetColor.WHITE


def _vertex_rule(complex_: BSPComplex, f: int, constraint_ids: Sequence[int]) -> Optional[FacetColor]:
    loop = _loop_points(complex_, f)
    triangles = [complex_.constraint_points(cid) for cid in constraint_ids]
    for p in loop:
        if any(pin_it(p, c) for c in triangles):
            return FacetColor.BLACK
    for p in loop:
        if not any(pin_t(p, c) for c in triangles):
            return FacetColor.WHITE
    return None


def covering_constraints(complex_: BSPComplex, f: int, constraint_ids: Sequence[int],
                         centers: Optional[Dict[int, Optional[tuple]]] = None) -> List[int]:
    """
    Constraints among ``constraint_ids`` whose interior meets the facet interior.

    Virtual constraints are skipped.
    """
    ids = [cid for cid in constraint_ids if not complex_.constraints[cid].is_virtual]
    certified = _barycenter(complex_, f, centers) if ids else None
    covering = []
    for cid in ids:
        c = complex_.constraint_points(cid)
        if certified is not None and _in_closed_projection(certified[0], c, certified[1]):
            covering.append(cid)
        elif constraint_overlaps_facet(complex_, f, cid):
            covering.append(cid)
    return covering


def finalize_grey_facets(complex_: BSPComplex, show_progress: bool = False) -> ColoringStats:
    """
    Resolve GREY facets, then record covering constraints of every BLACK facet.
    """
    stats = ColoringStats()
    centers: Dict[int, Optional[tuple]] = {}
    for f in tqdm(range(len(complex_.facets)), desc="color", disable=not show_progress):
        facet = complex_.facets[f]
        if facet.color != FacetColor.GREY:
            continue
        color = _vertex_rule(complex_, f, facet.coplanar)
        if color is not None:
            stats.vertex_rule += 1
        else:
            color = fast_barycenter_test(complex_, f, facet.coplanar, centers)
            if color is not None:
                stats.fast += 1
            else:
                color = slow_exact_test(complex_, f, facet.coplanar)
                stats.slow += 1
        facet.color = color

    for f, facet in enumerate(complex_.facets):
        if facet.color != FacetColor.BLACK:
            stats.white += 1
            continue
        stats.black += 1
        candidates = [cid for cid in facet.coplanar if not complex_.constraints[cid].is_virtual]
        if len(candidates) == 1:
            # a black facet is covered by the union of its coplanar constraints
            facet.covering = candidates
        else:
            facet.covering = covering_constraints(complex_, f, candidates, centers)
        origins = {complex_.constraints[cid].origin for cid in facet.covering}
        facet.black_a = Origin.A in origins
        facet.black_b = Origin.B in origins
        if not facet.covering:
            logger.warning("black facet {} has no covering constraint".format(f))

    logger.info("facets colored: {} black, {} white ({} by vertices, {} fast, {} slow)".format(
        stats.black, stats.white, stats.vertex_rule, stats.fast, stats.slow))
    return stats

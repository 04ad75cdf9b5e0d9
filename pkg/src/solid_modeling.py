"""
Solid Modeling Operations.

This module provides:
- make_solid(): repair a soup into a closed solid
- boolean(): regularized union, intersection and difference of two soups
- resolve_self_intersections(): black facets of a soup, pairwise interior-disjoint
- SurfaceMesh helpers: extract_skin, triangulate, surface_area,
  surface_volume, check_manifold

Surface faces index the surface vertex array; ``source_vertices`` keeps the
BSP vertex behind every surface vertex.
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

from src.bsp_complex import OUTER, BSPComplex, FacetColor
from src.cell_classifier import classify_cells
from src.constraint_processing import Origin, condition_input, merge_inputs
from src.geometry_predicates import projection_axes
from src.implicit_points import orient2d_indirect
from src.loaders.soup_loader import fan_triangles
from src.logger import attach_to_log
from src.pipelines import MeshingConfig, PipelineStats, create_meshing_pipeline, timed_stage

logger = attach_to_log(__name__)


class BooleanOp(Enum):
    UNION = "union"
    INTERSECTION = "inter"
    DIFFERENCE = "diff"


@dataclass
class SurfaceMesh:
    """Polygonal surface with approximated coordinates."""
    vertices: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    faces: List[List[int]] = field(default_factory=list)
    source_vertices: List[int] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not self.faces


def _surface_from_loops(complex_: BSPComplex, loops: Iterable[List[int]]) -> SurfaceMesh:
    index: Dict[int, int] = {}
    faces = []
    for loop in loops:
        faces.append([index.setdefault(v, len(index)) for v in loop])
    sources = sorted(index, key=index.get)
    coords = [complex_.approx_point(v) for v in sources]
    collisions = [p for p, n in Counter(coords).items() if n > 1]
    if collisions:
        logger.warning("{} output vertices collide after rounding".format(len(collisions)))
    vertices = np.array(coords, dtype=float).reshape(-1, 3)
    return SurfaceMesh(vertices, faces, sources)


def extract_skin(complex_: BSPComplex, inside: Set[int]) -> SurfaceMesh:
    """Facets between an inside and an outside cell, oriented from inside to outside."""
    loops = []
    for f, facet in enumerate(complex_.facets):
        c0, c1 = facet.cells
        in0 = c0 != OUTER and c0 in inside
        in1 = c1 != OUTER and c1 in inside
        if in0 == in1:
            continue
        loops.append(complex_.oriented_facet_vertices(f, c0 if in0 else c1))
    return _surface_from_loops(complex_, loops)


def extract_black_facets(complex_: BSPComplex) -> SurfaceMesh:
    """Every black facet, oriented like its first covering constraint."""
    loops = []
    for f, facet in enumerate(complex_.facets):
        if facet.color != FacetColor.BLACK or not facet.covering:
            continue
        seq = complex_.facet_vertices(f)
        axes = projection_axes(*complex_.plane_points(facet.plane))
        reference = orient2d_indirect(*complex_.constraint_points(facet.covering[0]), axes)
        if complex_.loop_orientation(f, axes) != reference:
            seq.reverse()
        loops.append(seq)
    return _surface_from_loops(complex_, loops)


def triangulate(surface: SurfaceMesh) -> SurfaceMesh:
    """Fan every face from its first vertex."""
    triangles = [triangle for face in surface.faces for triangle in fan_triangles(face)]
    return SurfaceMesh(surface.vertices, triangles, list(surface.source_vertices))


def _triangle_corners(surface: SurfaceMesh) -> np.ndarray:
    triangles = triangulate(surface).faces
    if not triangles:
        return np.zeros((0, 3, 3))
    return surface.vertices[np.asarray(triangles, dtype=np.int64)]


def surface_area(surface: SurfaceMesh) -> float:
    corners = _triangle_corners(surface)
    cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    return 0.5 * float(np.linalg.norm(cross, axis=1).sum())


def surface_volume(surface: SurfaceMesh) -> float:
    """Signed enclosed volume; positive for outward-oriented closed surfaces."""
    corners = _triangle_corners(surface)
    det = np.einsum("ij,ij->i", corners[:, 0], np.cross(corners[:, 1], corners[:, 2]))
    return float(det.sum()) / 6.0


def check_manifold(surface: SurfaceMesh) -> List[str]:
    """
    Combinatorial manifold check.

    Every directed edge must be used once, and its reverse once. Runs on
    vertex indices, so rounding collisions do not hide problems.
    """
    directed = Counter()
    for face in surface.faces:
        for a, b in zip(face, face[1:] + face[:1]):
            directed[(a, b)] += 1
    problems = []
    for (a, b), n in sorted(directed.items()):
        if n != 1:
            problems.append("edge ({}, {}) used {} times in the same direction".format(a, b, n))
        elif directed.get((b, a), 0) != 1:
            problems.append("edge ({}, {}) has no opposite half".format(a, b))
    return problems


def _select_cells(complex_: BSPComplex, inside_a: Set[int], inside_b: Set[int], op: BooleanOp) -> Set[int]:
    cells = set(range(len(complex_.cells)))
    if op == BooleanOp.UNION:
        return inside_a | inside_b
    if op == BooleanOp.INTERSECTION:
        return inside_a & inside_b
    return inside_a & (cells - inside_b)


def make_solid(soup, config: Optional[MeshingConfig] = None,
               stats: Optional[PipelineStats] = None) -> Tuple[BSPComplex, SurfaceMesh]:
    """
    Repair a soup into a solid.

    Returns:
        The labeled complex (``complex_.inside`` set) and its outward skin

    Raises:
        EmptyInput, DegenerateInput: From conditioning and tetrahedrization
    """
    config = config or MeshingConfig()
    stats = stats if stats is not None else PipelineStats()
    with timed_stage(stats, "condition"):
        conditioned = condition_input(soup)
    complex_ = create_meshing_pipeline(conditioned, config, stats)
    with timed_stage(stats, "classify", config.collect_stats):
        labeling = classify_cells(complex_, (Origin.A,))
        complex_.inside = labeling.inside()
    with timed_stage(stats, "extract"):
        skin = extract_skin(complex_, complex_.inside)
    if skin.is_empty:
        logger.warning("the solid is empty")
    stats.counts["skin faces"] = len(skin.faces)
    return complex_, skin


def boolean(soup_a, soup_b, op: BooleanOp, config: Optional[MeshingConfig] = None,
            stats: Optional[PipelineStats] = None) -> SurfaceMesh:
    """
    Regularized boolean of two soups.

    Cells are classified twice, once against the black facets of each input;
    the per-cell memberships are then combined according to ``op``.
    """
    config = config or MeshingConfig()
    stats = stats if stats is not None else PipelineStats()
    with timed_stage(stats, "condition"):
        conditioned = merge_inputs(soup_a, soup_b)
    complex_ = create_meshing_pipeline(conditioned, config, stats)
    with timed_stage(stats, "classify", config.collect_stats):
        inside_a = classify_cells(complex_, (Origin.A,)).inside()
        inside_b = classify_cells(complex_, (Origin.B,)).inside()
        complex_.inside = _select_cells(complex_, inside_a, inside_b, op)
    logger.info("{}: {} cells in A, {} in B, {} selected".format(
        op.value, len(inside_a), len(inside_b), len(complex_.inside)))
    with timed_stage(stats, "extract"):
        skin = extract_skin(complex_, complex_.inside)
    if skin.is_empty:
        logger.warning("boolean result is empty")
    stats.counts["skin faces"] = len(skin.faces)
    return skin


def resolve_self_intersections(soup, config: Optional[MeshingConfig] = None,
                               stats: Optional[PipelineStats] = None) -> SurfaceMesh:
    """All black facets of the soup; the output is not necessarily closed."""
    config = config or MeshingConfig()
    stats = stats if stats is not None else PipelineStats()
    with timed_stage(stats, "condition"):
        conditioned = condition_input(soup)
    complex_ = create_meshing_pipeline(conditioned, config, stats)
    with timed_stage(stats, "extract"):
        surface = extract_black_facets(complex_)
    stats.counts["output faces"] = len(surface.faces)
    return surface

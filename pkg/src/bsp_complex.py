"""
BSP Cell Complex.

This module provides:
- BSPComplex: convex cells, facets, edges and vertices built from the
  Delaunay tets and split by constraint planes
- split_cell(): one binary split of a cell by its last pending constraint
- subdivide_all(): split until no cell has pending constraints
- check_complex(): convexity, planarity, provenance and shell checks

Vertices created by splits are LPI points (edge with a 2-point line) or TPI
points (edge with a 6-point line), always over the original input points.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from tqdm import tqdm

from src.constraint_processing import Constraint, ConstraintMap
from src.delaunay import TetMesh, face_key
from src.geometry_predicates import misaligned, projection_axes
from src.implicit_points import (
    ExplicitPoint3,
    GenericPoint,
    LPIPoint,
    TPIPoint,
    approximate,
    is_valid,
    orient2d_indirect,
    orient3d_indirect,
)
from src.logger import attach_to_log
from src.numeric_kernel import Sign, orient3d

logger = attach_to_log(__name__)

OUTER = -1


class FacetColor(Enum):
    """Facet state with respect to the input surface."""
    WHITE = "W"
    GREY = "G"
    BLACK = "B"


@dataclass
class BSPVertex:
    point: GenericPoint
    definition: Tuple[int, ...]


@dataclass
class BSPEdge:
    v0: int
    v1: int
    line_def: Tuple[int, ...]
    facets: List[int] = field(default_factory=list)

    def other(self, v: int) -> int:
        return self.v1 if v == self.v0 else self.v0


@dataclass
class BSPFacet:
    edges: List[int]
    plane: Tuple[int, int, int]
    cells: List[int]
    color: FacetColor = FacetColor.WHITE
    coplanar: List[int] = field(default_factory=list)
    black_a: bool = False
    black_b: bool = False
    covering: List[int] = field(default_factory=list)


@dataclass
class BSPCell:
    facets: List[int]
    constraints: List[int] = field(default_factory=list)


@dataclass
class SplitStats:
    splits: int = 0
    noop_splits: int = 0
    lpi_vertices: int = 0
    tpi_vertices: int = 0


class BSPComplex:
    """
    Convex polyhedral complex over a fixed set of input points.

    Attributes:
        points: Input explicit points; plane and line definitions index them
        constraints: All constraints, virtual ones included
        vertices, edges, facets, cells: Incidence records
        inside: Cells labeled IN once classified, else None
    """

    def __init__(self, points: Sequence[ExplicitPoint3], constraints: Sequence[Constraint]):
        self.points: List[ExplicitPoint3] = list(points)
        self.constraints: List[Constraint] = list(constraints)
        self.vertices: List[BSPVertex] = [BSPVertex(p, (i,)) for i, p in enumerate(self.points)]
        self.edges: List[BSPEdge] = []
        self.facets: List[BSPFacet] = []
        self.cells: List[BSPCell] = []
        self.stats = SplitStats()
        self.inside: Optional[Set[int]] = None
        self._approx: Dict[int, ExplicitPoint3] = {}
        self._sides: Dict[Tuple[int, ...], Dict[int, Sign]] = {}

    # ------------------------------------------------------------------
    # Geometry accessors
    # ------------------------------------------------------------------

    def point(self, v: int) -> GenericPoint:
        return self.vertices[v].point

    def approx_point(self, v: int) -> ExplicitPoint3:
        cached = self._approx.get(v)
        if cached is None:
            cached = approximate(self.vertices[v].point)
            self._approx[v] = cached
        return cached

    def vertex_side(self, v: int, plane: Sequence[int]) -> Sign:
        """
        Side of vertex v with respect to the plane through input points ``plane``.

        Vertices defined on the plane are ZERO without evaluation; other signs
        are computed once per (plane, vertex) and cached.
        """
        plane = tuple(plane)
        known = self._sides.setdefault(plane, {})
        side = known.get(v)
        if side is None:
            if self._defined_on(v, plane):
                side = Sign.ZERO
            else:
                side = orient3d_indirect(self.vertices[v].point, *self.plane_points(plane))
            known[v] = side
        return side

    def _defined_on(self, v: int, plane: Tuple[int, ...]) -> bool:
        definition = self.vertices[v].definition
        members = set(plane)
        if len(definition) == 1:
            return definition[0] in members
        if len(definition) == 5:
            # line through two points, then the cutting plane
            return set(definition[:2]) <= members or set(definition[2:]) == members
        return any(set(definition[i:i + 3]) == members for i in (0, 3, 6))

    def plane_points(self, ids: Sequence[int]) -> List[ExplicitPoint3]:
        return [self.points[i] for i in ids]

    def constraint_points(self, cid: int) -> List[ExplicitPoint3]:
        return self.plane_points(self.constraints[cid].vertices)

    def facet_vertices(self, f: int) -> List[int]:
        """Vertices of the facet in loop order."""
        loop = self.facets[f].edges
        first, second = self.edges[loop[0]], self.edges[loop[1]]
        start = first.v0 if first.v0 not in (second.v0, second.v1) else first.v1
        seq = [start]
        current = first.other(start)
        for e in loop[1:]:
            seq.append(current)
            current = self.edges[e].other(current)
        return seq

    def cell_vertices(self, c: int) -> List[int]:
        found: Set[int] = set()
        for f in self.cells[c].facets:
            for e in self.facets[f].edges:
                found.add(self.edges[e].v0)
                found.add(self.edges[e].v1)
        return sorted(found)

    def cell_edges(self, c: int) -> List[int]:
        return sorted({e for f in self.cells[c].facets for e in self.facets[f].edges})

    def facet_area(self, f: int) -> float:
        coords = np.array([self.approx_point(v) for v in self.facet_vertices(f)], dtype=float)
        cross = np.cross(coords, np.roll(coords, -1, axis=0)).sum(axis=0)
        return 0.5 * float(np.linalg.norm(cross))

    def other_cell(self, f: int, c: int) -> int:
        c0, c1 = self.facets[f].cells
        return c1 if c0 == c else c0

    def loop_orientation(self, f: int, axes: Tuple[int, int]) -> Sign:
        """Turning sign of the facet loop in the projection ``axes``."""
        loop = [self.point(v) for v in self.facet_vertices(f)]
        n = len(loop)
        for k in range(n):
            sign = orient2d_indirect(loop[k - 1], loop[k], loop[(k + 1) % n], axes)
            if sign != Sign.ZERO:
                return sign
        return Sign.ZERO

    def off_plane_vertex(self, c: int, f: int) -> Tuple[int, Sign]:
        """A vertex of cell c off the plane of facet f, and its side."""
        plane = self.facets[f].plane
        for v in self.cell_vertices(c):
            side = self.vertex_side(v, plane)
            if side != Sign.ZERO:
                return v, side
        raise ValueError("cell {} is flat".format(c))

    def oriented_facet_vertices(self, f: int, away_from: int) -> List[int]:
        """Loop of facet f ordered so that its normal points away from cell ``away_from``."""
        seq = self.facet_vertices(f)
        plane = self.plane_points(self.facets[f].plane)
        axes = projection_axes(*plane)
        aligned = self.loop_orientation(f, axes) == orient2d_indirect(*plane, axes)
        _, side = self.off_plane_vertex(away_from, f)
        if aligned == (side == Sign.POSITIVE):
            seq.reverse()
        return seq

    # ------------------------------------------------------------------
    # Construction helpers
    # ------------------------------------------------------------------

    def _add_vertex(self, point: GenericPoint, definition: Tuple[int, ...]) -> int:
        self.vertices.append(BSPVertex(point, definition))
        return len(self.vertices) - 1

    def _add_edge(self, v0: int, v1: int, line_def: Tuple[int, ...]) -> int:
        self.edges.append(BSPEdge(v0, v1, line_def))
        return len(self.edges) - 1

    def _add_facet(self, facet: BSPFacet) -> int:
        self.facets.append(facet)
        f = len(self.facets) - 1
        for e in facet.edges:
            self.edges[e].facets.append(f)
        return f

    # ------------------------------------------------------------------
    # Algorithm steps
    # ------------------------------------------------------------------

    def _split_point(self, e: int, plane: Tuple[int, int, int]) -> int:
        line = self.edges[e].line_def
        if len(line) == 2:
            point = LPIPoint(*self.plane_points(line), *self.plane_points(plane))
            self.stats.lpi_vertices += 1
        else:
            point = TPIPoint(*self.plane_points(line), *self.plane_points(plane))
            self.stats.tpi_vertices += 1
        return self._add_vertex(point, tuple(line) + tuple(plane))

    def _split_edge(self, e: int, middle: int) -> int:
        """Split edge e at vertex ``middle``; returns the id of the second half."""
        edge = self.edges[e]
        v0, v1 = edge.v0, edge.v1
        half = self._add_edge(middle, v1, edge.line_def)
        for f in edge.facets:
            loop = self.facets[f].edges
            idx = loop.index(e)
            prev = self.edges[loop[idx - 1]]
            entry = v0 if v0 in (prev.v0, prev.v1) else v1
            loop[idx:idx + 1] = [e, half] if entry == v0 else [half, e]
            self.edges[half].facets.append(f)
        edge.v1 = middle
        return half

    def _split_facet(self, f: int, sides: Dict[int, Sign], plane: Tuple[int, int, int]) -> int:
        """Split a straddled facet along its two on-plane vertices."""
        facet = self.facets[f]
        verts = self.facet_vertices(f)
        loop = list(facet.edges)
        i, j = [k for k, v in enumerate(verts) if sides[v] == Sign.ZERO]
        cut = self._add_edge(verts[i], verts[j], tuple(plane) + tuple(facet.plane))

        kept = loop[i:j] + [cut]
        moved = loop[j:] + loop[:i] + [cut]
        facet.edges = kept
        self.edges[cut].facets.append(f)
        twin = self._add_facet(BSPFacet(
            edges=moved,
            plane=facet.plane,
            cells=list(facet.cells),
            color=facet.color,
            coplanar=list(facet.coplanar),
            black_a=facet.black_a,
            black_b=facet.black_b,
        ))
        for e in moved[:-1]:
            self.edges[e].facets.remove(f)
        for c in facet.cells:
            if c != OUTER:
                self.cells[c].facets.append(twin)
        return twin

    def _chain(self, edges: Sequence[int]) -> List[int]:
        """Order a closed set of edges into a loop."""
        remaining = list(edges)
        loop = [remaining.pop(0)]
        tail = self.edges[loop[0]].v1
        while remaining:
            nxt = next(e for e in remaining if tail in (self.edges[e].v0, self.edges[e].v1))
            remaining.remove(nxt)
            loop.append(nxt)
            tail = self.edges[nxt].other(tail)
        return loop

    def split_cell(self, c: int) -> Optional[int]:
        """
        Split cell c by the plane of its last pending constraint.

        Returns:
            Id of the new cell on the negative side, or None when the plane
            does not cross the cell interior
        """
        cell = self.cells[c]
        k = cell.constraints.pop()
        plane = self.constraints[k].vertices
        p0, p1, p2 = self.plane_points(plane)

        # Stage 1: vertex sides
        sides = {v: self.vertex_side(v, plane) for v in self.cell_vertices(c)}
        if Sign.POSITIVE not in sides.values() or Sign.NEGATIVE not in sides.values():
            self.stats.noop_splits += 1
            logger.debug("constraint {} does not cross cell {}".format(k, c))
            return None

        # Stage 2: split crossed edges
        for e in self.cell_edges(c):
            edge = self.edges[e]
            if sides[edge.v0] * sides[edge.v1] < 0:
                middle = self._split_point(e, plane)
                sides[middle] = Sign.ZERO
                self._split_edge(e, middle)

        # Stage 3: split crossed facets
        for f in list(cell.facets):
            signs = {sides[v] for v in self.facet_vertices(f)}
            if Sign.POSITIVE in signs and Sign.NEGATIVE in signs:
                self._split_facet(f, sides, plane)

        # Stage 4: common facet on the cutting plane
        on_plane = [e for e in self.cell_edges(c)
                    if sides[self.edges[e].v0] == Sign.ZERO and sides[self.edges[e].v1] == Sign.ZERO]
        new_cell = len(self.cells)
        coplanar = [] if self.constraints[k].is_virtual else [k]
        pending = []
        for other in cell.constraints:
            other_sides = {orient3d(p, p0, p1, p2) for p in self.constraint_points(other)}
            if other_sides == {Sign.ZERO}:
                if not self.constraints[other].is_virtual:
                    coplanar.append(other)
            else:
                pending.append((other, other_sides))
        common = self._add_facet(BSPFacet(
            edges=self._chain(on_plane),
            plane=tuple(plane),
            cells=[c, new_cell],
            color=FacetColor.GREY if coplanar else FacetColor.WHITE,
            coplanar=coplanar,
        ))

        # Stage 5: partition facets
        above, below = [common], [common]
        for f in cell.facets:
            signs = {sides[v] for v in self.facet_vertices(f)}
            if Sign.NEGATIVE in signs:
                below.append(f)
                cells = self.facets[f].cells
                cells[cells.index(c)] = new_cell
            else:
                above.append(f)

        # Stage 6: redistribute pending constraints by vertex sides
        keep, give = [], []
        for other, other_sides in pending:
            if Sign.POSITIVE in other_sides:
                keep.append(other)
            if Sign.NEGATIVE in other_sides:
                give.append(other)
        cell.facets = above
        cell.constraints = keep
        self.cells.append(BSPCell(below, give))
        self.stats.splits += 1
        return new_cell


def init_from_tetmesh(mesh: TetMesh, cmap: ConstraintMap,
                      constraints: Sequence[Constraint]) -> BSPComplex:
    """One cell per finite tet; facets colored from the constraint map."""
    complex_ = BSPComplex(mesh.vertices, constraints)
    input_faces = {face_key(*c.vertices) for c in constraints if not c.is_virtual}
    facet_ids: Dict[Tuple[int, int, int], int] = {}
    edge_ids: Dict[Tuple[int, int], int] = {}

    def edge_id(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        if key not in edge_ids:
            edge_ids[key] = complex_._add_edge(key[0], key[1], key)
        return edge_ids[key]

    for t in mesh.finite_tets():
        cell_id = len(complex_.cells)
        cell = BSPCell([], list(cmap.tet_constraints.get(t, [])))
        complex_.cells.append(cell)
        for i in range(4):
            a, b, c = mesh.face_vertices(t, i)
            key = face_key(a, b, c)
            if key in facet_ids:
                f = facet_ids[key]
                complex_.facets[f].cells[1] = cell_id
            else:
                coplanar = list(cmap.facet_coplanar.get(key, []))
                if key in input_faces:
                    color = FacetColor.BLACK
                elif coplanar:
                    color = FacetColor.GREY
                else:
                    color = FacetColor.WHITE
                f = complex_._add_facet(BSPFacet(
                    edges=[edge_id(a, b), edge_id(b, c), edge_id(c, a)],
                    plane=(a, b, c),
                    cells=[cell_id, OUTER],
                    color=color,
                    coplanar=coplanar,
                ))
                facet_ids[key] = f
            cell.facets.append(f)

    logger.info("complex initialized: {} cells, {} facets".format(
        len(complex_.cells), len(complex_.facets)))
    return complex_


def subdivide_all(complex_: BSPComplex, show_progress: bool = False) -> None:
    """Split cells until no pending constraint is left."""
    worklist = [c for c in range(len(complex_.cells)) if complex_.cells[c].constraints]
    total = sum(len(complex_.cells[c].constraints) for c in worklist)
    with tqdm(total=total, desc="split", disable=not show_progress) as bar:
        while worklist:
            c = worklist.pop()
            while complex_.cells[c].constraints:
                created = complex_.split_cell(c)
                bar.update(1)
                if created is not None and complex_.cells[created].constraints:
                    bar.total += len(complex_.cells[created].constraints)
                    worklist.append(created)
    logger.info("subdivision done: {} cells, {} splits, {} no-op".format(
        len(complex_.cells), complex_.stats.splits, complex_.stats.noop_splits))


def _on_line(complex_: BSPComplex, v: int, line: Tuple[int, ...]) -> bool:
    point = complex_.point(v)
    pts = complex_.plane_points(line)
    if len(line) == 2:
        return not misaligned(point, pts[0], pts[1])
    return (complex_.vertex_side(v, line[0:3]) == Sign.ZERO
            and complex_.vertex_side(v, line[3:6]) == Sign.ZERO)


def check_complex(complex_: BSPComplex) -> List[str]:
    """
    Structural report; an empty list means every check passed.

    Checks facet incidence, loop closure, planarity, edge/line consistency,
    implicit point provenance, closed cell shells and cell convexity.
    """
    problems = []
    for v, vertex in enumerate(complex_.vertices):
        if not isinstance(vertex.point, ExplicitPoint3) and not is_valid(vertex.point):
            problems.append("vertex {} is an implicit point that does not exist".format(v))

    for e, edge in enumerate(complex_.edges):
        for v in (edge.v0, edge.v1):
            if not _on_line(complex_, v, edge.line_def):
                problems.append("vertex {} is off the line of edge {}".format(v, e))

    for f, facet in enumerate(complex_.facets):
        if facet.cells[0] == OUTER or facet.cells[0] == facet.cells[1]:
            problems.append("facet {} has invalid cells {}".format(f, facet.cells))
        loop = facet.edges
        for a, b in zip(loop, loop[1:] + loop[:1]):
            ea, eb = complex_.edges[a], complex_.edges[b]
            if not {ea.v0, ea.v1} & {eb.v0, eb.v1}:
                problems.append("facet {} has an open edge loop".format(f))
                break
        for v in complex_.facet_vertices(f):
            if complex_.vertex_side(v, facet.plane) != Sign.ZERO:
                problems.append("vertex {} is off the plane of facet {}".format(v, f))

    for c, cell in enumerate(complex_.cells):
        counts: Dict[int, int] = {}
        for f in cell.facets:
            if c not in complex_.facets[f].cells:
                problems.append("cell {} lists facet {} that does not reference it".format(c, f))
            for e in complex_.facets[f].edges:
                counts[e] = counts.get(e, 0) + 1
        if any(n != 2 for n in counts.values()):
            problems.append("cell {} is not a closed shell".format(c))
        vertices = complex_.cell_vertices(c)
        for f in cell.facets:
            signs = {complex_.vertex_side(v, complex_.facets[f].plane) for v in vertices}
            if Sign.POSITIVE in signs and Sign.NEGATIVE in signs:
                problems.append("cell {} is not convex at facet {}".format(c, f))
    return problems

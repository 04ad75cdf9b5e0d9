"""
Constraint Processing.

This module provides:
- condition_input() / merge_inputs(): exact vertex welding and degenerate
  triangle filtering, producing Constraint records
- detect_boundary_edges(): input edges not surrounded by the surface
- build_virtual_constraints(): one synthetic triangle per boundary edge
- map_constraints(): for every tet, the constraints meeting its interior,
  plus the coplanar constraints of every mesh facet
"""

from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.delaunay import SimplexKind, SimplexRef, TetMesh, face_key
from src.errors import EmptyInput, InternalWalkStall, NoWitnessVertex
from src.geometry_predicates import (
    coplanar_triangles_overlap,
    inner_segment_crosses_inner_triangle,
    inner_segment_crosses_triangle,
    inner_segments_cross,
    misaligned,
    point_in_inner_segment,
    point_in_inner_triangle,
    point_in_triangle,
    projection_axes,
    segment_meets_open_triangle,
)
from src.implicit_points import ExplicitPoint3, GenericPoint, LPIPoint, orient2d_indirect, orient3d_indirect
from src.logger import attach_to_log
from src.numeric_kernel import Sign, orient3d

logger = attach_to_log(__name__)

Edge = Tuple[int, int]


class Origin(Enum):
    """Which input a constraint comes from."""
    A = "A"
    B = "B"
    VIRTUAL = "virtual"


@dataclass(frozen=True)
class Constraint:
    """Input triangle; its normal follows the vertex order."""
    v1: int
    v2: int
    v3: int
    origin: Origin = Origin.A

    @property
    def vertices(self) -> Tuple[int, int, int]:
        return (self.v1, self.v2, self.v3)

    def edges(self) -> Tuple[Edge, Edge, Edge]:
        return ((self.v1, self.v2), (self.v2, self.v3), (self.v3, self.v1))

    @property
    def is_virtual(self) -> bool:
        return self.origin == Origin.VIRTUAL


@dataclass
class ConditionedInput:
    """Welded vertices and the constraints that survived conditioning."""
    vertices: List[ExplicitPoint3]
    constraints: List[Constraint]
    dropped_degenerate: int = 0
    dropped_duplicates: int = 0
    raw_vertex_count: int = 0


@dataclass
class ConstraintMap:
    """
    Tet -> constraints meeting its interior; facet -> coplanar constraints.

    Attributes:
        tet_constraints: Tet id -> constraint ids, in increasing order
        facet_coplanar: Sorted face triple -> non-virtual constraint ids
            coplanar with the face and overlapping it with positive area
        coincident: Constraints equal to a mesh face (never split anything)
    """
    tet_constraints: Dict[int, List[int]] = field(default_factory=dict)
    facet_coplanar: Dict[Tuple[int, int, int], List[int]] = field(default_factory=dict)
    coincident: Set[int] = field(default_factory=set)

    def add_coplanar(self, key: Tuple[int, int, int], constraint_id: int) -> None:
        ids = self.facet_coplanar.setdefault(key, [])
        if constraint_id not in ids:
            ids.append(constraint_id)


# ---------------------------------------------------------------------------
# Input conditioning
# ---------------------------------------------------------------------------

def _canonical_rotation(tri: Tuple[int, int, int]) -> Tuple[int, int, int]:
    k = tri.index(min(tri))
    return tri[k:] + tri[:k]


def _condition(parts: Sequence[Tuple[np.ndarray, np.ndarray, Origin]]) -> ConditionedInput:
    blocks = [np.asarray(v, dtype=float).reshape(-1, 3) for v, _, _ in parts]
    stacked = np.vstack(blocks) + 0.0
    if len(stacked) == 0:
        raise EmptyInput("input has no vertices")

    # Stage 1: weld exactly coincident vertices, keeping first-occurrence order
    unique, first, inverse = np.unique(stacked, axis=0, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    remap = rank[np.asarray(inverse).reshape(-1)]
    vertices = [ExplicitPoint3(float(x), float(y), float(z)) for x, y, z in unique[order]]

    # Stage 2: drop degenerate triangles and same-origin duplicates
    constraints: List[Constraint] = []
    seen = set()
    dropped_degenerate = 0
    dropped_duplicates = 0
    offset = 0
    for block, (_, triangles, origin) in zip(blocks, parts):
        for tri in np.asarray(triangles, dtype=np.int64).reshape(-1, 3):
            ids = tuple(int(remap[offset + i]) for i in tri)
            if len(set(ids)) < 3 or not misaligned(*(vertices[i] for i in ids)):
                dropped_degenerate += 1
                continue
            key = (_canonical_rotation(ids), origin)
            if key in seen:
                dropped_duplicates += 1
                continue
            seen.add(key)
            constraints.append(Constraint(ids[0], ids[1], ids[2], origin))
        offset += len(block)

    if dropped_degenerate:
        logger.warning("dropped {} degenerate triangles".format(dropped_degenerate))
    if dropped_duplicates:
        logger.debug("dropped {} duplicate triangles".format(dropped_duplicates))
    if not constraints:
        raise EmptyInput("no non-degenerate triangle in input")

    logger.info("conditioned input: {} vertices ({} raw), {} constraints".format(
        len(vertices), len(stacked), len(constraints)))
    return ConditionedInput(vertices, constraints, dropped_degenerate, dropped_duplicates, len(stacked))


def condition_input(soup, origin: Origin = Origin.A) -> ConditionedInput:
    """
    Weld vertices and filter the triangles of one soup.

    Args:
        soup: Object with ``vertices`` (n x 3) and ``triangles`` (m x 3)
        origin: Origin tag of the produced constraints

    Raises:
        EmptyInput: If no usable triangle remains
    """
    return _condition([(soup.vertices, soup.triangles, origin)])


def merge_inputs(soup_a, soup_b) -> ConditionedInput:
    """Condition two soups together; vertices are welded across both."""
    return _condition([(soup_a.vertices, soup_a.triangles, Origin.A),
                       (soup_b.vertices, soup_b.triangles, Origin.B)])


# ---------------------------------------------------------------------------
# Boundary edges and virtual constraints
# ---------------------------------------------------------------------------

def _edge_key(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


def detect_boundary_edges(vertices: Sequence[ExplicitPoint3],
                          constraints: Sequence[Constraint]) -> Set[Edge]:
    """
    Edges whose realization is not in the interior of the input surface.

    An edge is interior when an incident constraint leaves the plane of
    another, or when its coplanar incident constraints lie on both sides of
    it in a non-degenerate projection.
    """
    incident: Dict[Edge, List[int]] = defaultdict(list)
    for c in constraints:
        for a, b in c.edges():
            opposite = next(v for v in c.vertices if v != a and v != b)
            incident[_edge_key(a, b)].append(opposite)

    boundary = set()
    for (a, b), opposites in incident.items():
        if len(opposites) == 1:
            boundary.add((a, b))
            continue
        pa, pb = vertices[a], vertices[b]
        first = vertices[opposites[0]]
        if any(orient3d(pa, pb, first, vertices[o]) != Sign.ZERO for o in opposites[1:]):
            continue
        axes = projection_axes(pa, pb, first)
        sides = {orient2d_indirect(pa, pb, vertices[o], axes) for o in opposites}
        if not (Sign.POSITIVE in sides and Sign.NEGATIVE in sides):
            boundary.add((a, b))
    return boundary


def build_virtual_constraints(edges: Set[Edge], vertices: Sequence[ExplicitPoint3],
                              constraints: Sequence[Constraint], mesh: TetMesh,
                              path_counts: Optional[Counter] = None) -> List[Constraint]:
    """
    One virtual constraint <e1, e2, v> per boundary edge.

    v is searched first among the tets around the edge (or the stars of its
    endpoints when the edge is not a mesh edge), then among all vertices.

    Raises:
        NoWitnessVertex: If every vertex is coplanar with the incident constraint
    """
    counts = path_counts if path_counts is not None else Counter()
    incident: Dict[Edge, Constraint] = {}
    for c in constraints:
        for a, b in c.edges():
            incident.setdefault(_edge_key(a, b), c)

    virtual = []
    for e1, e2 in sorted(edges):
        plane = [vertices[v] for v in incident[(e1, e2)].vertices]

        def off_plane(v: int) -> bool:
            return orient3d(vertices[v], plane[0], plane[1], plane[2]) != Sign.ZERO

        tets = mesh.tets_around_edge(e1, e2)
        if not tets:
            tets = mesh.incident_tets(e1) | mesh.incident_tets(e2)
        local = sorted({v for t in tets for v in mesh.tets[t]} - {e1, e2})
        witness = next((v for v in local if off_plane(v)), None)
        if witness is not None:
            counts["tet_local"] += 1
        else:
            witness = next((v for v in range(len(vertices)) if off_plane(v)), None)
            if witness is None:
                raise NoWitnessVertex("no vertex off the plane of boundary edge ({}, {})".format(e1, e2))
            counts["global"] += 1
            logger.debug("virtual constraint for ({}, {}) used the global fallback".format(e1, e2))
        virtual.append(Constraint(e1, e2, witness, Origin.VIRTUAL))

    if virtual:
        logger.info("built {} virtual constraints ({} tet-local, {} global)".format(
            len(virtual), counts["tet_local"], counts["global"]))
    return virtual


# ---------------------------------------------------------------------------
# Contractions used by the tet/constraint classification
# ---------------------------------------------------------------------------

def o3c(p: GenericPoint, c: Sequence[GenericPoint]) -> Sign:
    """Side of p with respect to the oriented plane of constraint c."""
    return orient3d_indirect(p, c[0], c[1], c[2])


def pin_it(p: GenericPoint, c: Sequence[GenericPoint]) -> bool:
    return point_in_inner_triangle(p, c[0], c[1], c[2])


def pin_t(p: GenericPoint, c: Sequence[GenericPoint]) -> bool:
    return point_in_triangle(p, c[0], c[1], c[2])


def two_pin_s(a: GenericPoint, b: GenericPoint, u: GenericPoint, v: GenericPoint) -> bool:
    """True if collinear segments (a, b) and (u, v) share interior points."""
    if misaligned(a, b, u) or misaligned(a, b, v):
        return False
    if {a, b} == {u, v}:
        return True
    return (point_in_inner_segment(u, a, b) or point_in_inner_segment(v, a, b)
            or point_in_inner_segment(a, u, v) or point_in_inner_segment(b, u, v))


def isx_t(a: GenericPoint, b: GenericPoint, c: Sequence[GenericPoint]) -> bool:
    return inner_segment_crosses_triangle(a, b, c[0], c[1], c[2])


def isx_it(a: GenericPoint, b: GenericPoint, c: Sequence[GenericPoint]) -> bool:
    return inner_segment_crosses_inner_triangle(a, b, c[0], c[1], c[2])


def three_isx_it(c: Sequence[GenericPoint], face: Sequence[GenericPoint]) -> bool:
    """True if some edge of c pierces the open face."""
    return any(inner_segment_crosses_inner_triangle(c[i], c[(i + 1) % 3], *face) for i in range(3))


def isx_boundary_t(a: GenericPoint, b: GenericPoint, c: Sequence[GenericPoint]) -> bool:
    """True if the coplanar segment (a, b) crosses the interior of an edge of c."""
    return any(inner_segments_cross(a, b, c[i], c[(i + 1) % 3]) for i in range(3))


_TET_EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def tet_meets_constraint(tet: Sequence[ExplicitPoint3], c: Sequence[ExplicitPoint3]) -> bool:
    """
    True if the interior of the tet meets the closed constraint triangle.

    Shortcut rows certify the answer from a single contraction; the last row
    is an exact separating-plane test on the plane section of the tet.
    """
    sides = [o3c(p, c) for p in tet]

    # No strict straddle: the tet interior misses the constraint plane
    if not (Sign.POSITIVE in sides and Sign.NEGATIVE in sides):
        return False

    zeros = [i for i in range(4) if sides[i] == Sign.ZERO]
    crossing = [(i, j) for i, j in _TET_EDGES if sides[i] * sides[j] < 0]

    # A vertex of the tet inside the open constraint
    if any(pin_it(tet[i], c) for i in zeros):
        return True

    # A tet edge piercing the open constraint
    if any(isx_it(tet[i], tet[j], c) for i, j in crossing):
        return True

    # A constraint edge piercing an open tet face
    for k in range(4):
        face = [tet[m] for m in range(4) if m != k]
        if three_isx_it(c, face):
            return True

    if len(zeros) == 2:
        a, b = (tet[i] for i in zeros)
        positive = next(tet[i] for i in range(4) if sides[i] == Sign.POSITIVE)
        negative = next(tet[i] for i in range(4) if sides[i] == Sign.NEGATIVE)

        # A tet edge on the plane crossing a constraint edge
        if isx_boundary_t(a, b, c):
            return True

        # A tet edge overlapping a constraint edge: compare sides of the shared line
        for k in range(3):
            u, v, w = c[k], c[(k + 1) % 3], c[(k + 2) % 3]
            if two_pin_s(a, b, u, v):
                return (orient3d_indirect(a, b, positive, w)
                        == orient3d_indirect(a, b, positive, negative))

    # Every vertex of the plane section inside the closed constraint
    section: List[GenericPoint] = [tet[i] for i in zeros]
    section += [LPIPoint(tet[i], tet[j], c[0], c[1], c[2]) for i, j in crossing]
    if all(pin_t(tet[i], c) for i in zeros) and all(isx_t(tet[i], tet[j], c) for i, j in crossing):
        return True

    # Separating planes: tet faces, then planes through constraint edges
    for k in range(4):
        face = [tet[m] for m in range(4) if m != k]
        inner = orient3d(face[0], face[1], face[2], tet[k])
        if all(orient3d(face[0], face[1], face[2], p) != inner for p in c):
            return False
    witness = next(tet[i] for i in range(4) if sides[i] != Sign.ZERO)
    for k in range(3):
        u, v, w = c[k], c[(k + 1) % 3], c[(k + 2) % 3]
        inner = orient3d(u, v, witness, w)
        if all(orient3d_indirect(u, v, witness, x) != inner for x in section):
            return False
    return True


# ---------------------------------------------------------------------------
# Walk and growth
# ---------------------------------------------------------------------------

def _next_simplex(face: Tuple[int, int, int], wedges: Sequence[Sign]) -> SimplexRef:
    zeros = [k for k in range(3) if wedges[k] == Sign.ZERO]
    if not zeros:
        return SimplexRef(SimplexKind.FACE, face)
    if len(zeros) == 1:
        k = zeros[0]
        return SimplexRef(SimplexKind.EDGE, (face[k], face[(k + 1) % 3]))
    shared = {0: {0, 1}, 1: {1, 2}, 2: {2, 0}}
    vertex = (shared[zeros[0]] & shared[zeros[1]]).pop()
    return SimplexRef(SimplexKind.VERTEX, (face[vertex],))


def walk_edge(mesh: TetMesh, s0: int, s1: int) -> Set[int]:
    """
    Finite tets whose closure meets the segment (s0, s1).

    The walk moves through the lowest-dimensional simplex crossed by the
    segment after leaving the star of the current one.

    Raises:
        InternalWalkStall: If no boundary face of the current star is crossed
    """
    pts = mesh.vertices
    p0, p1 = pts[s0], pts[s1]
    sigma = SimplexRef(SimplexKind.VERTEX, (s0,))
    hull: Set[int] = set()
    for _ in range(mesh.num_tets + 8):
        star = mesh.simplex_tets(sigma)
        hull |= star
        if any(s1 in mesh.tets[t] for t in star):
            hull |= mesh.incident_tets(s1)
            return hull
        current = set(sigma.ids)
        following = None
        for t in sorted(star):
            verts = mesh.tets[t]
            for i in range(4):
                face = mesh.face_vertices(t, i)
                if current <= set(face):
                    continue
                f0, f1, f2 = (pts[v] for v in face)
                inside = orient3d(f0, f1, f2, pts[verts[i]])
                beyond = orient3d(f0, f1, f2, p1)
                if beyond == Sign.ZERO or beyond == inside:
                    continue
                wedges = (orient3d(p0, p1, f0, f1), orient3d(p0, p1, f1, f2), orient3d(p0, p1, f2, f0))
                if Sign.POSITIVE in wedges and Sign.NEGATIVE in wedges:
                    continue
                following = _next_simplex(face, wedges)
                break
            if following is not None:
                break
        if following is None:
            raise InternalWalkStall("walk from {} to {} stalled at {}".format(s0, s1, sigma))
        sigma = following
    raise InternalWalkStall("walk from {} to {} did not terminate".format(s0, s1))


def _grow(mesh: TetMesh, c: Sequence[ExplicitPoint3], hull: Set[int], corners: Sequence[int]) -> None:
    pts = mesh.vertices
    checked_vertices = set(corners)
    checked_edges: Set[Edge] = set()
    queue = deque(sorted(hull))
    while queue:
        t = queue.popleft()
        verts = mesh.tets[t]
        added: Set[int] = set()
        for v in verts:
            if v in checked_vertices:
                continue
            checked_vertices.add(v)
            if o3c(pts[v], c) == Sign.ZERO and pin_it(pts[v], c):
                added |= mesh.incident_tets(v)
        for i, j in _TET_EDGES:
            key = _edge_key(verts[i], verts[j])
            if key in checked_edges:
                continue
            checked_edges.add(key)
            if segment_meets_open_triangle(pts[key[0]], pts[key[1]], c):
                added |= mesh.tets_around_edge(*key)
        for u in sorted(added - hull):
            hull.add(u)
            queue.append(u)


def constraint_hull(mesh: TetMesh, constraint: Constraint) -> Set[int]:
    """Finite tets whose closure meets the constraint triangle."""
    hull: Set[int] = set()
    for a, b in constraint.edges():
        hull |= walk_edge(mesh, a, b)
    c = [mesh.vertices[v] for v in constraint.vertices]
    _grow(mesh, c, hull, constraint.vertices)
    return hull


def map_constraints(mesh: TetMesh, constraints: Sequence[Constraint]) -> ConstraintMap:
    """Map each constraint to the tets whose interior it meets."""
    cmap = ConstraintMap()
    pts = mesh.vertices
    per_tet: Dict[int, List[int]] = defaultdict(list)
    for cid, constraint in enumerate(constraints):
        a, b, c = constraint.vertices
        key = face_key(a, b, c)

        # Stage 1: constraints equal to a mesh face
        if mesh.has_face(a, b, c):
            cmap.coincident.add(cid)
            if not constraint.is_virtual:
                cmap.add_coplanar(key, cid)
            continue

        # Stage 2: walk and grow
        hull = constraint_hull(mesh, constraint)
        tri = [pts[a], pts[b], pts[c]]

        # Stage 3: classify
        for t in sorted(hull):
            tet = mesh.tet_points(t)
            if tet_meets_constraint(tet, tri):
                per_tet[t].append(cid)
            if constraint.is_virtual:
                continue
            sides = [o3c(p, tri) for p in tet]
            for k in range(4):
                if all(sides[m] == Sign.ZERO for m in range(4) if m != k):
                    face = mesh.face_vertices(t, k)
                    if coplanar_triangles_overlap([pts[v] for v in face], tri):
                        cmap.add_coplanar(face_key(*face), cid)

    cmap.tet_constraints = {t: sorted(ids) for t, ids in sorted(per_tet.items())}
    logger.info("mapped constraints: {} tets cut, {} coincident constraints".format(
        len(cmap.tet_constraints), len(cmap.coincident)))
    return cmap

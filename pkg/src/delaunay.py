"""
Delaunay Tetrahedrization.

This module provides:
- TetMesh: tetrahedra with neighbor links, ghost tets and per-vertex anchors
- build_delaunay(): incremental Bowyer-Watson insertion with a visibility walk
- Adjacency queries (incident tets, tets around an edge, tets of a face)
- check_delaunay(): structural and empty-circumsphere checks

Neighbor i of a tet is the tet across the face opposite its vertex i.
Finite tets have orient3d > 0. Ghost tets carry INFINITE_VERTEX in place of
one vertex and close the convex hull. Cospherical ties are broken by a
symbolic perturbation ordered by vertex id, so the mesh does not depend on
the insertion order.
"""

from collections import deque
from enum import Enum
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np
from tqdm import tqdm

from src.errors import DegenerateInput
from src.implicit_points import ExplicitPoint3
from src.logger import attach_to_log
from src.numeric_kernel import Sign, insphere, orient3d
from src.geometry_predicates import misaligned

logger = attach_to_log(__name__)

INFINITE_VERTEX = -1


class SimplexKind(Enum):
    """Dimension of a mesh simplex."""
    VERTEX = "vertex"
    EDGE = "edge"
    FACE = "face"
    TET = "tet"


class SimplexRef(NamedTuple):
    kind: SimplexKind
    ids: Tuple[int, ...]


def face_key(a: int, b: int, c: int) -> Tuple[int, int, int]:
    return tuple(sorted((a, b, c)))


class TetMesh:
    """
    Tetrahedral mesh with materialized ghost tets.

    Attributes:
        vertices: Input points, indexed by vertex id
        tets: Four vertex ids per tet (INFINITE_VERTEX for ghosts)
        neighbors: Four tet ids per tet, neighbor i opposite vertex i
        vertex_anchor: One incident tet per vertex, finite when possible
    """

    def __init__(self, vertices: Sequence[Sequence[float]]):
        self.vertices: List[ExplicitPoint3] = [
            ExplicitPoint3(float(v[0]), float(v[1]), float(v[2])) for v in vertices
        ]
        self.tets: List[List[int]] = []
        self.neighbors: List[List[int]] = []
        self.vertex_anchor: List[int] = [-1] * len(self.vertices)

    @property
    def num_tets(self) -> int:
        return len(self.tets)

    def is_ghost(self, t: int) -> bool:
        return INFINITE_VERTEX in self.tets[t]

    def finite_tets(self) -> List[int]:
        return [t for t in range(len(self.tets)) if not self.is_ghost(t)]

    def neighbor_across(self, t: int, i: int) -> int:
        return self.neighbors[t][i]

    def face_vertices(self, t: int, i: int) -> Tuple[int, int, int]:
        verts = self.tets[t]
        return tuple(verts[k] for k in range(4) if k != i)

    def point(self, v: int) -> ExplicitPoint3:
        return self.vertices[v]

    def tet_points(self, t: int) -> List[ExplicitPoint3]:
        return [self.vertices[v] for v in self.tets[t]]

    def incident_tets(self, v: int, include_ghosts: bool = False) -> Set[int]:
        """All tets having v as a vertex, by a walk from the vertex anchor."""
        start = self.vertex_anchor[v]
        if start < 0:
            return set()
        seen = {start}
        queue = deque([start])
        while queue:
            t = queue.popleft()
            verts = self.tets[t]
            for i in range(4):
                if verts[i] == v:
                    continue
                n = self.neighbors[t][i]
                if n not in seen:
                    seen.add(n)
                    queue.append(n)
        if include_ghosts:
            return seen
        return {t for t in seen if not self.is_ghost(t)}

    def tets_around_edge(self, a: int, b: int, include_ghosts: bool = False) -> Set[int]:
        return {t for t in self.incident_tets(a, include_ghosts) if b in self.tets[t]}

    def tets_of_face(self, a: int, b: int, c: int, include_ghosts: bool = False) -> Set[int]:
        return {t for t in self.tets_around_edge(a, b, include_ghosts) if c in self.tets[t]}

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.tets_around_edge(a, b, include_ghosts=True))

    def has_face(self, a: int, b: int, c: int) -> bool:
        return bool(self.tets_of_face(a, b, c, include_ghosts=True))

    def simplex_tets(self, simplex: SimplexRef) -> Set[int]:
        """Finite tets incident to a vertex, edge or face."""
        ids = simplex.ids
        if simplex.kind == SimplexKind.VERTEX:
            return self.incident_tets(ids[0])
        if simplex.kind == SimplexKind.EDGE:
            return self.tets_around_edge(ids[0], ids[1])
        if simplex.kind == SimplexKind.FACE:
            return self.tets_of_face(ids[0], ids[1], ids[2])
        return {ids[0]}

    # ------------------------------------------------------------------
    # Predicates with the symbolic tie-break
    # ------------------------------------------------------------------

    def orient(self, a: int, b: int, c: int, d: int) -> Sign:
        pts = self.vertices
        return orient3d(pts[a], pts[b], pts[c], pts[d])

    def insphere_perturbed(self, tet: Sequence[int], e: int) -> Sign:
        """
        insphere for a positively oriented finite tet, never ZERO.

        A zero determinant is resolved by lifting each point by an
        infinitesimal that grows with its vertex id.
        """
        a, b, c, d = tet
        pts = self.vertices
        result = insphere(pts[a], pts[b], pts[c], pts[d], pts[e])
        if result != Sign.ZERO:
            return result
        terms = {
            e: lambda: -self.orient(a, b, c, d),
            d: lambda: self.orient(a, b, c, e),
            c: lambda: -self.orient(a, b, d, e),
            b: lambda: self.orient(a, c, d, e),
            a: lambda: -self.orient(b, c, d, e),
        }
        for v in sorted(terms, reverse=True):
            value = terms[v]()
            if value != 0:
                return Sign(int(value))
        return Sign.NEGATIVE


def morton_order(points: Sequence[Sequence[float]], bits: int = 10) -> np.ndarray:
    """Indices sorting the points along a Z-order curve."""
    pts = np.asarray(points, dtype=float)
    lo = pts.min(axis=0)
    span = np.ptp(pts, axis=0)
    span[span == 0.0] = 1.0
    scale = (1 << bits) - 1
    cells = np.clip(((pts - lo) / span * scale).astype(np.uint64), 0, scale)
    keys = np.zeros(len(pts), dtype=np.uint64)
    for bit in range(bits):
        for axis in range(3):
            keys |= ((cells[:, axis] >> np.uint64(bit)) & np.uint64(1)) << np.uint64(3 * bit + axis)
    return np.argsort(keys, kind="stable")


class _DelaunayBuilder:
    """Bowyer-Watson insertion state for one TetMesh."""

    def __init__(self, mesh: TetMesh):
        self.mesh = mesh
        self.dead: List[bool] = []
        self.free: List[int] = []
        self.hint = 0

    # Stage 1: initial tet and its four ghosts
    def start(self, a: int, b: int, c: int, d: int) -> None:
        mesh = self.mesh
        if mesh.orient(a, b, c, d) < 0:
            a, b = b, a
        base = [a, b, c, d]
        created = [self._new_tet(base)]
        for i in range(4):
            ghost = list(base)
            ghost[i] = INFINITE_VERTEX
            j, k = [m for m in range(4) if m != i][:2]
            ghost[j], ghost[k] = ghost[k], ghost[j]
            created.append(self._new_tet(ghost))
        self._link(created)
        self._set_anchors(created)
        self.hint = created[0]

    def _new_tet(self, verts: List[int]) -> int:
        mesh = self.mesh
        if self.free:
            t = self.free.pop()
            mesh.tets[t] = verts
            mesh.neighbors[t] = [-1, -1, -1, -1]
            self.dead[t] = False
        else:
            t = len(mesh.tets)
            mesh.tets.append(verts)
            mesh.neighbors.append([-1, -1, -1, -1])
            self.dead.append(False)
        return t

    def _link(self, created: Iterable[int]) -> None:
        """Connect the still-unlinked faces of the given tets to each other."""
        mesh = self.mesh
        pending: Dict[Tuple[int, int, int], Tuple[int, int]] = {}
        for t in created:
            for i in range(4):
                if mesh.neighbors[t][i] != -1:
                    continue
                key = face_key(*mesh.face_vertices(t, i))
                if key in pending:
                    u, j = pending.pop(key)
                    mesh.neighbors[t][i] = u
                    mesh.neighbors[u][j] = t
                else:
                    pending[key] = (t, i)

    def _set_anchors(self, created: Iterable[int]) -> None:
        mesh = self.mesh
        created = list(created)
        ordered = [t for t in created if mesh.is_ghost(t)] + [t for t in created if not mesh.is_ghost(t)]
        for t in ordered:
            for v in mesh.tets[t]:
                if v != INFINITE_VERTEX:
                    mesh.vertex_anchor[v] = t

    # Stage 2: point location
    def _outside_face(self, t: int, p: int) -> Optional[int]:
        """Index of a face of finite tet t that p lies strictly beyond."""
        mesh = self.mesh
        verts = mesh.tets[t]
        for i in range(4):
            trial = list(verts)
            trial[i] = p
            if mesh.orient(*trial) < 0:
                return i
        return None

    def locate(self, p: int) -> int:
        mesh = self.mesh
        t = self.hint
        if self.dead[t] or mesh.is_ghost(t):
            t = next(s for s in range(len(mesh.tets)) if not self.dead[s] and not mesh.is_ghost(s))
        previous = -1
        budget = 4 * len(mesh.tets) + 64
        step = 0
        while step < budget:
            if mesh.is_ghost(t):
                return t
            verts = mesh.tets[t]
            moved = False
            for r in range(4):
                i = (r + step) % 4
                n = mesh.neighbors[t][i]
                if n == previous:
                    continue
                trial = list(verts)
                trial[i] = p
                if mesh.orient(*trial) < 0:
                    previous, t = t, n
                    moved = True
                    break
            if not moved:
                return t
            step += 1
        logger.debug("visibility walk exhausted its budget, scanning tets")
        return self._locate_by_scan(p)

    def _locate_by_scan(self, p: int) -> int:
        mesh = self.mesh
        for t in range(len(mesh.tets)):
            if self.dead[t]:
                continue
            if mesh.is_ghost(t):
                if self._ghost_beyond(t, p) == Sign.POSITIVE:
                    return t
            elif self._outside_face(t, p) is None:
                return t
        raise DegenerateInput("point {} could not be located".format(p))

    # Stage 3: cavity
    def _ghost_beyond(self, t: int, p: int) -> Sign:
        mesh = self.mesh
        trial = list(mesh.tets[t])
        i = trial.index(INFINITE_VERTEX)
        trial[i] = p
        return mesh.orient(*trial)

    def in_conflict(self, t: int, p: int) -> bool:
        mesh = self.mesh
        if mesh.is_ghost(t):
            side = self._ghost_beyond(t, p)
            if side != Sign.ZERO:
                return side == Sign.POSITIVE
            i = mesh.tets[t].index(INFINITE_VERTEX)
            finite = mesh.neighbors[t][i]
            return mesh.insphere_perturbed(mesh.tets[finite], p) == Sign.POSITIVE
        return mesh.insphere_perturbed(mesh.tets[t], p) == Sign.POSITIVE

    def cavity(self, start: int, p: int) -> Set[int]:
        mesh = self.mesh
        cavity = {start}
        rejected: Set[int] = set()
        queue = deque([start])
        while queue:
            t = queue.popleft()
            for n in mesh.neighbors[t]:
                if n in cavity or n in rejected:
                    continue
                if self.in_conflict(n, p):
                    cavity.add(n)
                    queue.append(n)
                else:
                    rejected.add(n)
        return cavity

    def _boundary(self, cavity: Set[int]) -> List[Tuple[int, int, int, int]]:
        """Records (cavity tet, face index, outside tet, its face index)."""
        mesh = self.mesh
        records = []
        for c in sorted(cavity):
            for i in range(4):
                n = mesh.neighbors[c][i]
                if n in cavity:
                    continue
                j = mesh.neighbors[n].index(c)
                records.append((c, i, n, j))
        return records

    def insert(self, p: int) -> None:
        mesh = self.mesh
        start = self.locate(p)
        cavity = self.cavity(start, p)

        # Grow the cavity until every new finite tet is positively oriented
        while True:
            records = self._boundary(cavity)
            flat = set()
            for c, i, n, _ in records:
                verts = list(mesh.tets[c])
                verts[i] = p
                if INFINITE_VERTEX in verts:
                    continue
                if mesh.orient(*verts) <= 0:
                    flat.add(n)
            if not flat:
                break
            cavity |= flat

        new_verts = []
        for c, i, n, j in records:
            verts = list(mesh.tets[c])
            verts[i] = p
            new_verts.append(verts)

        for c in cavity:
            self.dead[c] = True
            self.free.append(c)

        created = []
        for (c, i, n, j), verts in zip(records, new_verts):
            t = self._new_tet(verts)
            mesh.neighbors[t][i] = n
            mesh.neighbors[n][j] = t
            created.append(t)
        self._link(created)
        self._set_anchors(created)
        finite = [t for t in created if not mesh.is_ghost(t)]
        self.hint = finite[-1] if finite else created[-1]

    # Stage 4: compaction
    def compact(self) -> None:
        mesh = self.mesh
        if not any(self.dead):
            return
        remap = {}
        tets, neighbors = [], []
        for t in range(len(mesh.tets)):
            if not self.dead[t]:
                remap[t] = len(tets)
                tets.append(mesh.tets[t])
                neighbors.append(mesh.neighbors[t])
        mesh.tets = tets
        mesh.neighbors = [[remap[n] for n in nbs] for nbs in neighbors]
        mesh.vertex_anchor = [remap[a] if a >= 0 else -1 for a in mesh.vertex_anchor]
        self.dead = [False] * len(tets)
        self.free = []


def _initial_simplex(mesh: TetMesh, order: Sequence[int]) -> Tuple[int, int, int, int]:
    pts = mesh.vertices
    a, b = order[0], order[1]
    c = next((v for v in order[2:] if misaligned(pts[a], pts[b], pts[v])), None)
    if c is None:
        raise DegenerateInput("all input points are collinear")
    d = next((v for v in order[2:] if v != c and mesh.orient(a, b, c, v) != Sign.ZERO), None)
    if d is None:
        raise DegenerateInput("all input points are coplanar")
    return a, b, c, d


def build_delaunay(points: Sequence[Sequence[float]], presort: bool = True, seed: int = 0,
                   show_progress: bool = False) -> TetMesh:
    """
    Delaunay tetrahedrization of a point set.

    Args:
        points: Distinct input points
        presort: Insert along a Morton curve (faster point location)
        seed: Shuffles the insertion order when presort is off; 0 keeps input order
        show_progress: Display a tqdm progress bar

    Returns:
        TetMesh

    Raises:
        DegenerateInput: Fewer than 4 points, duplicates, or no volume spanned
    """
    if len(points) < 4:
        raise DegenerateInput("at least 4 points are required, got {}".format(len(points)))
    mesh = TetMesh(points)
    if len(set(mesh.vertices)) != len(mesh.vertices):
        raise DegenerateInput("duplicate input points")

    if presort:
        order = [int(i) for i in morton_order(mesh.vertices)]
    elif seed:
        order = [int(i) for i in np.random.default_rng(seed).permutation(len(points))]
    else:
        order = list(range(len(points)))

    a, b, c, d = _initial_simplex(mesh, order)
    logger.info("Delaunay: inserting {} points".format(len(points)))

    builder = _DelaunayBuilder(mesh)
    builder.start(a, b, c, d)
    rest = [v for v in order if v not in (a, b, c, d)]
    for v in tqdm(rest, desc="delaunay", disable=not show_progress):
        builder.insert(v)
    builder.compact()

    logger.info("Delaunay: {} finite tets, {} ghost tets".format(
        len(mesh.finite_tets()), mesh.num_tets - len(mesh.finite_tets())))
    return mesh


def check_delaunay(mesh: TetMesh, check_empty_sphere: bool = True) -> List[str]:
    """
    Structural validity report; an empty list means the mesh is valid.

    Checks neighbor symmetry, finite tet orientation, anchor incidence and,
    optionally, the empty-circumsphere property against every vertex.
    """
    problems = []
    for t, verts in enumerate(mesh.tets):
        if verts.count(INFINITE_VERTEX) > 1:
            problems.append("tet {} has more than one infinite vertex".format(t))
        for i in range(4):
            n = mesh.neighbors[t][i]
            if n < 0 or n >= mesh.num_tets:
                problems.append("tet {} face {} has no neighbor".format(t, i))
                continue
            if t not in mesh.neighbors[n]:
                problems.append("tets {} and {} are not mutual neighbors".format(t, n))
                continue
            j = mesh.neighbors[n].index(t)
            if face_key(*mesh.face_vertices(t, i)) != face_key(*mesh.face_vertices(n, j)):
                problems.append("tets {} and {} disagree on their shared face".format(t, n))
        if not mesh.is_ghost(t) and mesh.orient(*verts) != Sign.POSITIVE:
            problems.append("tet {} is not positively oriented".format(t))

    for v, anchor in enumerate(mesh.vertex_anchor):
        if anchor < 0 or v not in mesh.tets[anchor]:
            problems.append("vertex {} has an invalid anchor".format(v))

    if check_empty_sphere:
        pts = mesh.vertices
        for t in mesh.finite_tets():
            a, b, c, d = mesh.tets[t]
            for v in range(len(pts)):
                if v in (a, b, c, d):
                    continue
                if insphere(pts[a], pts[b], pts[c], pts[d], pts[v]) == Sign.POSITIVE:
                    problems.append("vertex {} lies inside the circumsphere of tet {}".format(v, t))
    return problems

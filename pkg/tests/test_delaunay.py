from fractions import Fraction

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from src.delaunay import INFINITE_VERTEX, SimplexKind, SimplexRef, build_delaunay, check_delaunay, morton_order
from src.errors import DegenerateInput
from src.numeric_kernel import Sign
from tests import oracles

CUBE_CORNERS = [
    (0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
    (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1),
]


def _volume(mesh):
    return sum((oracles.tet_volume(*mesh.tet_points(t)) for t in mesh.finite_tets()), Fraction(0))


def _finite_tet_sets(mesh):
    return {frozenset(mesh.tets[t]) for t in mesh.finite_tets()}


def test_cube_corners_fill_the_cube():
    mesh = build_delaunay(CUBE_CORNERS)
    assert _volume(mesh) == 1
    assert check_delaunay(mesh) == []
    assert all(mesh.orient(*mesh.tets[t]) == Sign.POSITIVE for t in mesh.finite_tets())


def test_cospherical_ties_are_never_zero():
    mesh = build_delaunay(CUBE_CORNERS)
    for t in mesh.finite_tets():
        for v in range(8):
            if v not in mesh.tets[t]:
                assert mesh.insphere_perturbed(mesh.tets[t], v) != Sign.ZERO


def test_random_points_are_delaunay(rng):
    points = rng.standard_normal((60, 3))
    mesh = build_delaunay(points)
    assert check_delaunay(mesh) == []
    assert float(_volume(mesh)) == pytest.approx(ConvexHull(points).volume, rel=1e-12)


def test_ghosts_close_the_hull(rng):
    points = rng.uniform(-1.0, 1.0, (40, 3))
    mesh = build_delaunay(points)
    hull_faces = {tuple(sorted(f)) for f in ConvexHull(points).simplices}
    ghost_faces = set()
    for t in range(mesh.num_tets):
        if mesh.is_ghost(t):
            ghost_faces.add(tuple(sorted(v for v in mesh.tets[t] if v != INFINITE_VERTEX)))
    assert ghost_faces == hull_faces


def test_insertion_order_does_not_change_the_mesh(rng):
    points = rng.standard_normal((50, 3))
    sorted_mesh = build_delaunay(points, presort=True)
    shuffled_mesh = build_delaunay(points, presort=False, seed=11)
    plain_mesh = build_delaunay(points, presort=False, seed=0)
    assert _finite_tet_sets(sorted_mesh) == _finite_tet_sets(shuffled_mesh) == _finite_tet_sets(plain_mesh)


def test_adjacency_queries_match_a_scan(rng):
    mesh = build_delaunay(rng.standard_normal((30, 3)))
    for v in range(30):
        scanned = {t for t in mesh.finite_tets() if v in mesh.tets[t]}
        assert mesh.incident_tets(v) == scanned
        assert mesh.simplex_tets(SimplexRef(SimplexKind.VERTEX, (v,))) == scanned

    t = mesh.finite_tets()[0]
    a, b, c, d = mesh.tets[t]
    assert mesh.has_edge(a, b)
    assert mesh.has_face(a, b, c)
    assert t in mesh.tets_of_face(a, b, c)
    assert mesh.tets_around_edge(a, b) == {s for s in mesh.finite_tets() if {a, b} <= set(mesh.tets[s])}
    assert mesh.simplex_tets(SimplexRef(SimplexKind.TET, (t,))) == {t}


@pytest.mark.parametrize("points, message", [
    ([(0, 0, 0), (1, 0, 0), (0, 1, 0)], "at least 4"),
    ([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 0)], "duplicate"),
    ([(0, 0, 0), (1, 1, 1), (2, 2, 2), (3, 3, 3)], "collinear"),
    ([(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0), (2, 3, 0)], "coplanar"),
])
def test_degenerate_input_is_rejected(points, message):
    with pytest.raises(DegenerateInput, match=message):
        build_delaunay(points)


def test_morton_order_is_a_permutation(rng):
    points = rng.uniform(0.0, 1.0, (100, 3))
    order = morton_order(points)
    assert sorted(order.tolist()) == list(range(100))
    # A flat point set still orders
    flat = np.column_stack([points[:, :2], np.zeros(100)])
    assert sorted(morton_order(flat).tolist()) == list(range(100))

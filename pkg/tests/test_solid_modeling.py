import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import concatenate_soups, cube_soup, icosphere_soup, open_pyramid_soup, rotated_cube_soup
from src.bsp_complex import FacetColor
from src.constraint_processing import condition_input
from src.implicit_points import exact_coordinates
from src.loaders.soup_loader import TriangleSoupFile
from src.pipelines import MeshingConfig, PipelineStats, create_meshing_pipeline
from src.solid_modeling import (
    BooleanOp,
    SurfaceMesh,
    boolean,
    check_manifold,
    make_solid,
    resolve_self_intersections,
    surface_area,
    surface_volume,
    triangulate,
)
from tests import oracles


def _soup(vertices, triangles) -> TriangleSoupFile:
    return TriangleSoupFile(np.asarray(vertices, dtype=float), np.asarray(triangles, dtype=np.int64), "off", "")


def test_cube_round_trips_into_the_same_solid(unit_cube):
    complex_, skin = make_solid(unit_cube)
    assert surface_area(skin) == pytest.approx(6.0)
    assert surface_volume(skin) == pytest.approx(1.0)
    assert check_manifold(skin) == []
    assert complex_.inside == set(range(len(complex_.cells)))


def test_open_pyramid_is_closed(open_pyramid):
    _, skin = make_solid(open_pyramid)
    assert surface_volume(skin) == pytest.approx(4.0)
    assert check_manifold(skin) == []


def test_cube_with_a_hole_and_a_flipped_face(unit_cube):
    # Arrange: drop one top triangle and flip one side triangle
    triangles = unit_cube.triangles.copy()
    triangles[4] = triangles[4][::-1]
    soup = _soup(unit_cube.vertices, np.delete(triangles, 2, axis=0))

    # Act
    _, skin = make_solid(soup)

    # Assert
    assert surface_volume(skin) == pytest.approx(1.0)
    assert surface_area(skin) == pytest.approx(6.0)
    assert check_manifold(skin) == []


@pytest.mark.slow
@pytest.mark.parametrize("op, expected", [
    (BooleanOp.UNION, 1.875),
    (BooleanOp.INTERSECTION, 0.125),
    (BooleanOp.DIFFERENCE, 0.875),
])
def test_booleans_of_overlapping_cubes(op, expected):
    skin = boolean(cube_soup(), cube_soup(origin=(0.5, 0.5, 0.5)), op)
    assert surface_volume(skin) == pytest.approx(expected)
    assert check_manifold(skin) == []


def test_union_of_disjoint_cubes():
    skin = boolean(cube_soup(), cube_soup(origin=(3.0, 0.0, 0.0)), BooleanOp.UNION)
    assert surface_volume(skin) == pytest.approx(2.0)
    assert surface_area(skin) == pytest.approx(12.0)


def test_difference_with_itself_is_empty():
    skin = boolean(cube_soup(), cube_soup(), BooleanOp.DIFFERENCE)
    assert skin.is_empty
    assert surface_volume(skin) == 0.0


def test_flat_input_gives_an_empty_solid():
    soup = _soup([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    stats = PipelineStats()
    complex_, skin = make_solid(soup, MeshingConfig(), stats)
    assert skin.is_empty
    assert stats.counts["virtual constraints"] == 3
    assert len(complex_.points) == 4


def test_resolve_splits_crossing_triangles():
    # Arrange: a horizontal triangle pierced by a vertical one
    soup = _soup(
        [[0, 0, 0], [2, 0, 0], [0, 2, 0], [0.5, -1, -1], [0.5, 3, -1], [0.5, 0.5, 1]],
        [[0, 1, 2], [3, 4, 5]],
    )

    # Act
    surface = resolve_self_intersections(soup)

    # Assert: both triangles are cut along their common segment and nothing is lost
    assert len(surface.faces) >= 4
    assert surface_area(surface) == pytest.approx(2.0 + 4.0)
    on_a_plane = (surface.vertices[:, 2] == 0.0) | (surface.vertices[:, 0] == 0.5)
    assert on_a_plane.all()


def test_stats_are_filled(unit_cube):
    stats = PipelineStats()
    make_solid(unit_cube, MeshingConfig(collect_stats=True), stats)
    assert {"condition", "delaunay", "virtual", "map", "split", "color", "classify", "extract"} <= set(stats.phases)
    assert stats.counts["welded vertices"] == 8
    assert stats.counts["skin faces"] > 0
    assert "delaunay" in stats.peak_memory


def test_triangulate_fans_polygons():
    surface = SurfaceMesh(np.array([[0.0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]), [[0, 1, 2, 3]], [0, 1, 2, 3])
    assert triangulate(surface).faces == [[0, 1, 2], [0, 2, 3]]
    assert surface_area(surface) == pytest.approx(1.0)


def test_manifold_check_reports_open_edges():
    surface = SurfaceMesh(np.zeros((3, 3)), [[0, 1, 2]], [0, 1, 2])
    assert len(check_manifold(surface)) == 3


def _cube_chain(count: int) -> TriangleSoupFile:
    """Randomly rotated unit cubes, each overlapping the next."""
    return concatenate_soups(*(rotated_cube_soup(k, center=(0.6 * k, 0.3 * (k % 2), 0.2 * (k % 3)))
                               for k in range(count)))


@pytest.mark.slow
def test_ten_rotated_cubes_mesh_within_two_minutes():
    soup = _cube_chain(10)

    start = time.perf_counter()
    complex_, skin = make_solid(soup, MeshingConfig(check_invariants=True))
    elapsed = time.perf_counter() - start

    assert elapsed < 120.0
    assert check_manifold(skin) == []
    assert 1.0 < surface_volume(skin) < 10.0
    assert complex_.inside


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_union_and_intersection_volumes_add_up(seed):
    # Arrange: a random box and a rotated cube centered inside it
    rng = np.random.default_rng(seed)
    origin = rng.uniform(-0.5, 0.5, 3)
    sizes = rng.uniform(0.5, 1.5, 3)
    box = cube_soup(origin=tuple(origin), size=sizes)
    cube = rotated_cube_soup(seed, center=origin + sizes * rng.uniform(0.25, 0.75, 3))

    # Act
    union = boolean(box, cube, BooleanOp.UNION)
    intersection = boolean(box, cube, BooleanOp.INTERSECTION)

    # Assert
    expected = float(np.prod(sizes)) + 1.0
    assert surface_volume(union) + surface_volume(intersection) == pytest.approx(expected, abs=1e-9)
    assert check_manifold(union) == []
    assert check_manifold(intersection) == []


_BARYCENTRIC = [
    (1, 0, 0), (0, 1, 0), (0, 0, 1),
    (Fraction(1, 2), Fraction(1, 2), 0), (0, Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 2), 0, Fraction(1, 2)),
    (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)),
    (Fraction(1, 7), Fraction(2, 7), Fraction(4, 7)),
    (Fraction(3, 5), Fraction(1, 5), Fraction(1, 5)),
]


def _black_facet_polygons(complex_):
    """Plane point, normal, projection axes and projected loop of every black facet, all exact."""
    polygons = []
    for f, facet in enumerate(complex_.facets):
        if facet.color != FacetColor.BLACK:
            continue
        r, s, t = (oracles.q(p) for p in complex_.plane_points(facet.plane))
        normal = oracles.cross(oracles.sub(s, r), oracles.sub(t, r))
        dropped = max(range(3), key=lambda k: abs(normal[k]))
        axes = [k for k in range(3) if k != dropped]
        loop = [exact_coordinates(complex_.point(v)) for v in complex_.facet_vertices(f)]
        polygons.append((r, normal, axes, [(p[axes[0]], p[axes[1]]) for p in loop]))
    return polygons


def _on_black_facet(point, polygons) -> bool:
    for r, normal, axes, loop in polygons:
        if oracles.dot(normal, oracles.sub(point, r)) != 0:
            continue
        projected = (point[axes[0]], point[axes[1]])
        signs = {oracles.orient2d(loop[k], loop[(k + 1) % len(loop)], projected) for k in range(len(loop))}
        if not {1, -1} <= signs:
            return True
    return False


@pytest.mark.slow
@pytest.mark.parametrize("soup", [
    _soup([[0, 0, 0], [2, 0, 0], [0, 2, 0], [0.5, -1, -1], [0.5, 3, -1], [0.5, 0.5, 1]], [[0, 1, 2], [3, 4, 5]]),
    open_pyramid_soup(),
    concatenate_soups(cube_soup(), cube_soup(origin=(0.5, 0.5, 0.5))),
], ids=["crossing", "open", "overlapping"])
def test_input_triangles_are_covered_by_black_facets(soup):
    complex_ = create_meshing_pipeline(condition_input(soup))
    polygons = _black_facet_polygons(complex_)

    for cid, constraint in enumerate(complex_.constraints):
        if constraint.is_virtual:
            continue
        corners = [oracles.q(p) for p in complex_.constraint_points(cid)]
        for weights in _BARYCENTRIC:
            point = tuple(sum(w * c[k] for w, c in zip(weights, corners)) for k in range(3))
            assert _on_black_facet(point, polygons), "constraint {} at {}".format(cid, weights)


def _punctured(soup: TriangleSoupFile, holes: int) -> TriangleSoupFile:
    """Drop ``holes`` triangles that share no vertex with each other."""
    used, dropped = set(), []
    for t, triangle in enumerate(soup.triangles.tolist()):
        if len(dropped) == holes:
            break
        if used.isdisjoint(triangle):
            used.update(triangle)
            dropped.append(t)
    assert len(dropped) == holes
    return _soup(soup.vertices, np.delete(soup.triangles, dropped, axis=0))


@pytest.mark.slow
def test_sphere_with_a_hundred_holes_is_closed():
    sphere = icosphere_soup(3)
    full = surface_volume(SurfaceMesh(sphere.vertices, sphere.triangles.tolist(), []))

    _, skin = make_solid(_punctured(sphere, 100))

    assert check_manifold(skin) == []
    assert surface_volume(skin) == pytest.approx(full, rel=0.02)


@pytest.mark.slow
def test_boolean_results_feed_further_booleans():
    # Arrange
    union = boolean(cube_soup(), cube_soup(origin=(0.5, 0.5, 0.5)), BooleanOp.UNION)
    union_soup = _soup(union.vertices, triangulate(union).faces)
    notch = cube_soup(origin=(-0.25, 0.25, 0.25), size=0.5)

    # Act
    result = boolean(union_soup, notch, BooleanOp.DIFFERENCE, MeshingConfig(check_invariants=True))

    # Assert
    assert surface_volume(result) == pytest.approx(1.875 - 0.0625)
    assert check_manifold(result) == []

from src.bsp_complex import FacetColor, init_from_tetmesh
from src.constraint_processing import Constraint, ConstraintMap, Origin
from src.delaunay import build_delaunay
from src.facet_coloring import (
    constraint_overlaps_facet,
    covering_constraints,
    fast_barycenter_test,
    finalize_grey_facets,
    slow_exact_test,
)
from src.implicit_points import ExplicitPoint3

CORNERS = [(0.0, 0.0, 0.0), (4.0, 0.0, 0.0), (0.0, 4.0, 0.0), (0.0, 0.0, 4.0)]


def _tet_complex():
    return init_from_tetmesh(build_delaunay(CORNERS), ConstraintMap(), [])


def _base_facet(complex_) -> int:
    return next(f for f in range(len(complex_.facets)) if set(complex_.facet_vertices(f)) == {0, 1, 2})


def _add_constraint(complex_, corners, origin=Origin.A) -> int:
    """Add a constraint; corners are point ids or new (x, y, z) points."""
    ids = []
    for corner in corners:
        if isinstance(corner, int):
            ids.append(corner)
        else:
            complex_.points.append(ExplicitPoint3(*map(float, corner)))
            ids.append(len(complex_.points) - 1)
    complex_.constraints.append(Constraint(ids[0], ids[1], ids[2], origin))
    return len(complex_.constraints) - 1


def _make_grey(complex_, f, constraint_ids):
    facet = complex_.facets[f]
    facet.color = FacetColor.GREY
    facet.coplanar = list(constraint_ids)


def test_constraint_equal_to_the_facet():
    complex_ = _tet_complex()
    f = _base_facet(complex_)
    k = _add_constraint(complex_, (0, 2, 1))

    assert fast_barycenter_test(complex_, f, [k]) == FacetColor.BLACK
    assert slow_exact_test(complex_, f, [k]) == FacetColor.BLACK
    assert covering_constraints(complex_, f, [k]) == [k]


def test_constraint_sharing_only_an_edge():
    complex_ = _tet_complex()
    f = _base_facet(complex_)
    k = _add_constraint(complex_, (0, (2.0, -3.0, 0.0), 1))

    assert not constraint_overlaps_facet(complex_, f, k)
    assert fast_barycenter_test(complex_, f, [k]) == FacetColor.WHITE
    assert slow_exact_test(complex_, f, [k]) == FacetColor.WHITE
    assert covering_constraints(complex_, f, [k]) == []


def test_crossing_constraint_overlaps_through_edge_witnesses():
    # Arrange: no facet vertex inside c and no c corner inside the facet
    complex_ = _tet_complex()
    f = _base_facet(complex_)
    k = _add_constraint(complex_, ((1.0, -1.0, 0.0), (3.0, -1.0, 0.0), (2.0, 5.0, 0.0)))

    # Act / Assert
    assert constraint_overlaps_facet(complex_, f, k)
    assert slow_exact_test(complex_, f, [k]) == FacetColor.BLACK


def test_constraint_strictly_containing_a_vertex():
    complex_ = _tet_complex()
    f = _base_facet(complex_)
    k = _add_constraint(complex_, ((-1.0, -1.0, 0.0), (2.0, -1.0, 0.0), (-1.0, 2.0, 0.0)))
    assert constraint_overlaps_facet(complex_, f, k)


def test_touching_at_a_vertex_is_not_an_overlap():
    complex_ = _tet_complex()
    f = _base_facet(complex_)
    k = _add_constraint(complex_, (1, (6.0, 0.0, 0.0), (6.0, -2.0, 0.0)))
    assert not constraint_overlaps_facet(complex_, f, k)


def test_finalize_resolves_grey_facets():
    # Arrange
    complex_ = _tet_complex()
    f = _base_facet(complex_)
    k = _add_constraint(complex_, (0, 2, 1), Origin.B)
    _make_grey(complex_, f, [k])

    # Act
    stats = finalize_grey_facets(complex_)

    # Assert
    facet = complex_.facets[f]
    assert facet.color == FacetColor.BLACK
    assert facet.covering == [k]
    assert facet.black_b and not facet.black_a
    assert stats.fast == 1
    assert (stats.black, stats.white) == (1, 3)


def test_vertex_rule_decides_before_the_barycenter():
    complex_ = _tet_complex()
    f = _base_facet(complex_)
    covering = _add_constraint(complex_, ((-1.0, -1.0, 0.0), (10.0, -1.0, 0.0), (-1.0, 10.0, 0.0)))
    _make_grey(complex_, f, [covering])
    other = next(g for g in range(len(complex_.facets)) if set(complex_.facet_vertices(g)) == {0, 1, 3})
    far = _add_constraint(complex_, ((10.0, 0.0, 10.0), (11.0, 0.0, 10.0), (10.0, 0.0, 11.0)))
    _make_grey(complex_, other, [far])

    stats = finalize_grey_facets(complex_)

    assert stats.vertex_rule == 2
    assert complex_.facets[f].color == FacetColor.BLACK
    assert complex_.facets[other].color == FacetColor.WHITE


def test_virtual_constraints_never_cover():
    complex_ = _tet_complex()
    f = _base_facet(complex_)
    k = _add_constraint(complex_, (0, 2, 1), Origin.VIRTUAL)
    complex_.facets[f].color = FacetColor.BLACK
    complex_.facets[f].coplanar = [k]

    finalize_grey_facets(complex_)

    assert complex_.facets[f].covering == []
    assert not complex_.facets[f].black_a and not complex_.facets[f].black_b

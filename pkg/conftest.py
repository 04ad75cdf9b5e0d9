"""Shared pytest fixtures: seeds and small triangle soups."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from src.loaders.soup_loader import TriangleSoupFile

CUBE_TRIANGLES = np.array([
    [0, 2, 1], [0, 3, 2],
    [4, 5, 6], [4, 6, 7],
    [0, 1, 5], [0, 5, 4],
    [1, 2, 6], [1, 6, 5],
    [2, 3, 7], [2, 7, 6],
    [3, 0, 4], [3, 4, 7],
], dtype=np.int64)


def cube_soup(origin=(0.0, 0.0, 0.0), size=1.0) -> TriangleSoupFile:
    """Closed, outward-oriented axis-aligned box; ``size`` is a scalar or one length per axis."""
    x, y, z = origin
    sx, sy, sz = np.broadcast_to(np.asarray(size, dtype=float), 3)
    vertices = np.array([
        [x, y, z], [x + sx, y, z], [x + sx, y + sy, z], [x, y + sy, z],
        [x, y, z + sz], [x + sx, y, z + sz], [x + sx, y + sy, z + sz], [x, y + sy, z + sz],
    ], dtype=float)
    return TriangleSoupFile(vertices, CUBE_TRIANGLES.copy(), "off", "")


def rotated_cube_soup(seed: int, center=(0.0, 0.0, 0.0), size=1.0) -> TriangleSoupFile:
    """Cube centered at ``center`` under a random rotation drawn from ``seed``."""
    half = size / 2.0
    cube = cube_soup(origin=(-half, -half, -half), size=size)
    rotation = Rotation.random(random_state=seed).as_matrix()
    cube.vertices = cube.vertices @ rotation.T + np.asarray(center, dtype=float)
    return cube


def concatenate_soups(*soups) -> TriangleSoupFile:
    """One soup holding all triangles of ``soups``, vertices left unwelded."""
    offsets = np.cumsum([0] + [len(s.vertices) for s in soups[:-1]])
    vertices = np.concatenate([s.vertices for s in soups])
    triangles = np.concatenate([s.triangles + offset for s, offset in zip(soups, offsets)])
    return TriangleSoupFile(vertices, triangles.astype(np.int64), "off", "")


def icosphere_soup(subdivisions: int) -> TriangleSoupFile:
    """Unit icosphere with 20 * 4**subdivisions outward triangles."""
    t = (1.0 + 5.0 ** 0.5) / 2.0
    vertices = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
                [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
                [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    vertices = [list(np.asarray(v, dtype=float) / np.linalg.norm(v)) for v in vertices]
    faces = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
             [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
             [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
             [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    for _ in range(subdivisions):
        midpoints = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in midpoints:
                m = (np.asarray(vertices[a]) + np.asarray(vertices[b])) / 2.0
                vertices.append(list(m / np.linalg.norm(m)))
                midpoints[key] = len(vertices) - 1
            return midpoints[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])
        faces = refined
    points = np.array(vertices, dtype=float)
    triangles = np.array(faces, dtype=np.int64)
    corners = points[triangles]
    normals = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    inward = np.einsum("ij,ij->i", normals, corners.mean(axis=1)) < 0
    triangles[inward] = triangles[inward][:, ::-1]
    return TriangleSoupFile(points, triangles, "off", "")


def open_pyramid_soup() -> TriangleSoupFile:
    """Square pyramid (base 2x2, height 3) with one base triangle removed."""
    vertices = np.array([
        [0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [2.0, 2.0, 0.0], [0.0, 2.0, 0.0], [1.0, 1.0, 3.0],
    ])
    triangles = np.array([
        [0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4],
        [0, 2, 1],
    ], dtype=np.int64)
    return TriangleSoupFile(vertices, triangles, "off", "")


@pytest.fixture
def seed():
    return 20240917


@pytest.fixture
def rng(seed):
    return np.random.default_rng(seed)


@pytest.fixture
def unit_cube():
    return cube_soup()


@pytest.fixture
def open_pyramid():
    return open_pyramid_soup()


@pytest.fixture
def make_cube():
    return cube_soup

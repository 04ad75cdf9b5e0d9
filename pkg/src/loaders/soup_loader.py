"""
Triangle soup reader and surface writer.

Reads OFF, OBJ, ASCII STL and binary STL into a TriangleSoupFile; writes
surfaces as OFF (polygons) or OBJ (triangles). Polygons are fan-triangulated
on input. Coordinates are written with repr so they read back unchanged.
"""

import os
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np

from src.errors import ParseError, UnsupportedFormat
from src.logger import attach_to_log

logger = attach_to_log(__name__)

_EXTENSIONS = {".off": "off", ".obj": "obj", ".stl": "stl"}

_STL_RECORD = np.dtype([
    ("normal", "<f4", (3,)),
    ("corners", "<f4", (3, 3)),
    ("attribute", "<u2"),
])


@dataclass
class TriangleSoupFile:
    """Raw triangles as read from disk, before any welding."""
    vertices: np.ndarray
    triangles: np.ndarray
    source_format: str = ""
    path: str = ""
    polygons: int = field(default=0)


def detect_format(path: str, fmt: Optional[str] = None) -> str:
    """
    Format name from ``fmt`` or the file extension.

    Raises:
        UnsupportedFormat: If neither names a known format
    """
    if fmt:
        name = fmt.lower().lstrip(".")
        if name in ("off", "obj", "stl"):
            return name
        raise UnsupportedFormat("unknown format: {}".format(fmt))
    ext = os.path.splitext(path)[1].lower()
    if ext not in _EXTENSIONS:
        raise UnsupportedFormat("unknown file extension: {}".format(ext or path))
    return _EXTENSIONS[ext]


def _tokens(text: str) -> Iterator[Tuple[int, List[str]]]:
    """Non-empty lines split into words, comments removed, with 1-based line numbers."""
    for number, line in enumerate(text.splitlines(), start=1):
        words = line.split("#", 1)[0].split()
        if words:
            yield number, words


def _coordinates(words: List[str], number: int) -> List[float]:
    try:
        coords = [float(w) for w in words[:3]]
    except ValueError:
        raise ParseError("invalid coordinate in {}".format(" ".join(words)), "line {}".format(number))
    if len(coords) != 3:
        raise ParseError("expected 3 coordinates", "line {}".format(number))
    if not all(np.isfinite(coords)):
        raise ParseError("non-finite coordinate", "line {}".format(number))
    return coords


def fan_triangles(polygon: List[int]) -> List[List[int]]:
    """Triangles fanned from the first corner of a convex polygon."""
    return [[polygon[0], polygon[k], polygon[k + 1]] for k in range(1, len(polygon) - 1)]


def _check_indices(polygon: List[int], count: int, number: int) -> None:
    if any(i < 0 or i >= count for i in polygon):
        raise ParseError("vertex index out of range", "line {}".format(number))


def _read_off(text: str) -> Tuple[List[List[float]], List[List[int]], int]:
    lines = _tokens(text)
    try:
        number, words = next(lines)
    except StopIteration:
        raise ParseError("empty file", "line 1")
    if not words[0].upper().endswith("OFF"):
        raise ParseError("missing OFF header", "line {}".format(number))
    words = words[1:]
    if not words:
        try:
            number, words = next(lines)
        except StopIteration:
            raise ParseError("missing element counts", "line {}".format(number))
    try:
        nv, nf = int(words[0]), int(words[1])
    except (ValueError, IndexError):
        raise ParseError("invalid element counts", "line {}".format(number))

    vertices, triangles = [], []
    for _ in range(nv):
        number, words = next(lines, (number, None))
        if words is None:
            raise ParseError("unexpected end of file in vertex list", "line {}".format(number))
        vertices.append(_coordinates(words, number))
    for _ in range(nf):
        number, words = next(lines, (number, None))
        if words is None:
            raise ParseError("unexpected end of file in face list", "line {}".format(number))
        try:
            k = int(words[0])
            polygon = [int(w) for w in words[1:k + 1]]
        except ValueError:
            raise ParseError("invalid face record", "line {}".format(number))
        if k < 3 or len(polygon) != k:
            raise ParseError("invalid face record", "line {}".format(number))
        _check_indices(polygon, nv, number)
        triangles.extend(fan_triangles(polygon))
    return vertices, triangles, nf


def _read_obj(text: str) -> Tuple[List[List[float]], List[List[int]], int]:
    vertices, triangles = [], []
    polygons = 0
    for number, words in _tokens(text):
        if words[0] == "v":
            vertices.append(_coordinates(words[1:], number))
        elif words[0] == "f":
            try:
                refs = [int(w.split("/")[0]) for w in words[1:]]
            except ValueError:
                raise ParseError("invalid face record", "line {}".format(number))
            polygon = [r - 1 if r > 0 else len(vertices) + r for r in refs]
            if len(polygon) < 3:
                raise ParseError("face with fewer than 3 vertices", "line {}".format(number))
            _check_indices(polygon, len(vertices), number)
            triangles.extend(fan_triangles(polygon))
            polygons += 1
    return vertices, triangles, polygons


def _read_ascii_stl(text: str) -> Tuple[List[List[float]], List[List[int]], int]:
    vertices = []
    for number, words in _tokens(text):
        if words[0].lower() == "vertex":
            vertices.append(_coordinates(words[1:], number))
    if len(vertices) % 3:
        raise ParseError("vertex count is not a multiple of 3")
    triangles = [[i, i + 1, i + 2] for i in range(0, len(vertices), 3)]
    return vertices, triangles, len(triangles)


def _read_binary_stl(data: bytes) -> Tuple[np.ndarray, np.ndarray, int]:
    if len(data) < 84:
        raise ParseError("truncated binary STL header", "byte 0")
    count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
    if len(data) < 84 + count * _STL_RECORD.itemsize:
        raise ParseError("truncated binary STL records", "byte {}".format(len(data)))
    records = np.frombuffer(data, dtype=_STL_RECORD, count=count, offset=84)
    corners = records["corners"].astype(float).reshape(-1, 3)
    bad = np.flatnonzero(~np.isfinite(corners).all(axis=1))
    if bad.size:
        k = int(bad[0])
        offset = 84 + (k // 3) * _STL_RECORD.itemsize + 12 + (k % 3) * 12
        raise ParseError("non-finite coordinate", "byte {}".format(offset))
    triangles = np.arange(3 * count, dtype=np.int64).reshape(-1, 3)
    return corners, triangles, count


def _is_binary_stl(data: bytes) -> bool:
    if len(data) >= 84:
        count = int(np.frombuffer(data, dtype="<u4", count=1, offset=80)[0])
        if len(data) == 84 + count * _STL_RECORD.itemsize:
            return True
    return not data.lstrip().lower().startswith(b"solid")


def read_soup(path: str, fmt: Optional[str] = None) -> TriangleSoupFile:
    """
    Read a triangle soup.

    Args:
        path: Input file
        fmt: Optional format name overriding the extension

    Raises:
        UnsupportedFormat: Unknown extension or format name
        ParseError: Malformed content, with a line number or byte offset
        OSError: If the file cannot be read
    """
    name = detect_format(path, fmt)
    with open(path, "rb") as handle:
        data = handle.read()

    if name == "stl" and _is_binary_stl(data):
        vertices, triangles, polygons = _read_binary_stl(data)
        name = "stl-binary"
    else:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            raise ParseError("file is not valid text")
        reader = {"off": _read_off, "obj": _read_obj, "stl": _read_ascii_stl}[name]
        vertices, triangles, polygons = reader(text)

    soup = TriangleSoupFile(
        vertices=np.asarray(vertices, dtype=float).reshape(-1, 3),
        triangles=np.asarray(triangles, dtype=np.int64).reshape(-1, 3),
        source_format=name,
        path=path,
        polygons=polygons,
    )
    logger.info("read {}: {} vertices, {} triangles ({})".format(
        os.path.basename(path), len(soup.vertices), len(soup.triangles), name))
    return soup


def write_surface(mesh, path: str, fmt: Optional[str] = None) -> None:
    """
    Write a SurfaceMesh as OFF (polygons) or OBJ (triangles).

    Raises:
        UnsupportedFormat: For any other format
    """
    name = detect_format(path, fmt)
    if name == "stl":
        raise UnsupportedFormat("surfaces are written as OFF or OBJ")
    lines = []
    if name == "off":
        lines.append("OFF")
        lines.append("{} {} 0".format(len(mesh.vertices), len(mesh.faces)))
        lines.extend("{!r} {!r} {!r}".format(*map(float, p)) for p in mesh.vertices)
        lines.extend("{} {}".format(len(face), " ".join(str(v) for v in face)) for face in mesh.faces)
    else:
        lines.extend("v {!r} {!r} {!r}".format(*map(float, p)) for p in mesh.vertices)
        lines.extend("f {}".format(" ".join(str(v + 1) for v in triangle))
                     for face in mesh.faces for triangle in fan_triangles(face))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
    logger.info("wrote {}: {} vertices, {} faces".format(path, len(mesh.vertices), len(mesh.faces)))

"""
PVOL volume mesh format.

Text dump of a BSP complex that keeps implicit vertices exact: every vertex
is stored by the indices of its defining input points, never by rounded
coordinates.

    PVOL 1
    points <n>      x y z
    vertices <m>    E i | L p q r s t | T r1 s1 t1 r2 s2 t2 r3 s3 t3
    edges <k>       v0 v1 2 a b | v0 v1 6 a b c d e f
    facets <f>      a b c cell0 cell1 color flags n e1 .. en
    cells <c>       label n f1 .. fn
"""

from typing import Iterator, List, Tuple

from src.bsp_complex import OUTER, BSPCell, BSPComplex, BSPEdge, BSPFacet, BSPVertex, FacetColor
from src.errors import ParseError
from src.implicit_points import ExplicitPoint3, LPIPoint, TPIPoint
from src.logger import attach_to_log

logger = attach_to_log(__name__)

_HEADER = "PVOL 1"
_KINDS = {1: "E", 5: "L", 9: "T"}


def _flags(facet: BSPFacet) -> str:
    text = ("A" if facet.black_a else "") + ("B" if facet.black_b else "")
    return text or "-"


def _label(complex_: BSPComplex, c: int) -> str:
    if complex_.inside is None:
        return "-"
    return "IN" if c in complex_.inside else "OUT"


def write_volume(complex_: BSPComplex, path: str) -> None:
    """Write the complex in PVOL format."""
    lines = [_HEADER, "points {}".format(len(complex_.points))]
    lines.extend("{!r} {!r} {!r}".format(p.x, p.y, p.z) for p in complex_.points)

    lines.append("vertices {}".format(len(complex_.vertices)))
    for vertex in complex_.vertices:
        kind = _KINDS[len(vertex.definition)]
        lines.append("{} {}".format(kind, " ".join(str(i) for i in vertex.definition)))

    lines.append("edges {}".format(len(complex_.edges)))
    for edge in complex_.edges:
        lines.append("{} {} {} {}".format(edge.v0, edge.v1, len(edge.line_def),
                                          " ".join(str(i) for i in edge.line_def)))

    lines.append("facets {}".format(len(complex_.facets)))
    for facet in complex_.facets:
        lines.append("{} {} {} {} {} {} {} {}".format(
            facet.plane[0], facet.plane[1], facet.plane[2],
            facet.cells[0], facet.cells[1], facet.color.value, _flags(facet),
            " ".join([str(len(facet.edges))] + [str(e) for e in facet.edges])))

    lines.append("cells {}".format(len(complex_.cells)))
    for c, cell in enumerate(complex_.cells):
        lines.append("{} {}".format(_label(complex_, c),
                                    " ".join([str(len(cell.facets))] + [str(f) for f in cell.facets])))

    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")
    logger.info("wrote {}: {} vertices, {} facets, {} cells".format(
        path, len(complex_.vertices), len(complex_.facets), len(complex_.cells)))


class _Reader:
    def __init__(self, text: str):
        self._lines: Iterator[Tuple[int, List[str]]] = (
            (n, line.split()) for n, line in enumerate(text.splitlines(), start=1) if line.strip())
        self.number = 0

    def next(self) -> List[str]:
        try:
            self.number, words = next(self._lines)
        except StopIteration:
            raise ParseError("unexpected end of file", "line {}".format(self.number + 1))
        return words

    def section(self, name: str) -> int:
        words = self.next()
        if len(words) != 2 or words[0] != name:
            raise self.error("expected '{} <count>'".format(name))
        return self.int(words[1])

    def int(self, word: str) -> int:
        try:
            return int(word)
        except ValueError:
            raise self.error("invalid integer {}".format(word))

    def ints(self, words: List[str]) -> List[int]:
        return [self.int(w) for w in words]

    def indices(self, values: List[int], count: int, what: str) -> List[int]:
        for i in values:
            if not 0 <= i < count:
                raise self.error("{} index {} out of range".format(what, i))
        return values

    def error(self, message: str) -> ParseError:
        return ParseError(message, "line {}".format(self.number))


def read_volume(path: str) -> BSPComplex:
    """
    Read a PVOL file back into a BSPComplex.

    Constraints are not stored, so the returned complex has none.

    Raises:
        ParseError: Malformed content, with the line number
    """
    with open(path, "r") as handle:
        reader = _Reader(handle.read())
    if " ".join(reader.next()) != _HEADER:
        raise reader.error("missing '{}' header".format(_HEADER))

    points = []
    for _ in range(reader.section("points")):
        words = reader.next()
        try:
            points.append(ExplicitPoint3(*(float(w) for w in words)))
        except (TypeError, ValueError):
            raise reader.error("invalid point")
    complex_ = BSPComplex(points, [])

    def at(i: int) -> ExplicitPoint3:
        return points[reader.indices([i], len(points), "point")[0]]

    vertices = []
    for _ in range(reader.section("vertices")):
        words = reader.next()
        ids = tuple(reader.ints(words[1:]))
        kind = words[0]
        if kind == "E" and len(ids) == 1:
            vertices.append(BSPVertex(at(ids[0]), ids))
        elif kind == "L" and len(ids) == 5:
            vertices.append(BSPVertex(LPIPoint(*(at(i) for i in ids)), ids))
        elif kind == "T" and len(ids) == 9:
            vertices.append(BSPVertex(TPIPoint(*(at(i) for i in ids)), ids))
        else:
            raise reader.error("invalid vertex record")
    complex_.vertices = vertices

    for _ in range(reader.section("edges")):
        values = reader.ints(reader.next())
        if len(values) < 3 or values[2] not in (2, 6) or len(values) != 3 + values[2]:
            raise reader.error("invalid edge record")
        reader.indices(values[0:2], len(vertices), "vertex")
        reader.indices(values[3:], len(points), "point")
        complex_.edges.append(BSPEdge(values[0], values[1], tuple(values[3:])))

    colors = {color.value: color for color in FacetColor}
    facet_lines = []
    for f in range(reader.section("facets")):
        words = reader.next()
        if len(words) < 8 or words[5] not in colors:
            raise reader.error("invalid facet record")
        plane = tuple(reader.indices(reader.ints(words[0:3]), len(points), "point"))
        cells = reader.ints(words[3:5])
        if any(c < OUTER for c in cells):
            raise reader.error("cell index out of range")
        edges = reader.indices(reader.ints(words[8:]), len(complex_.edges), "edge")
        if len(edges) != reader.int(words[7]):
            raise reader.error("facet edge count mismatch")
        flags = words[6]
        complex_.facets.append(BSPFacet(edges, plane, cells, colors[words[5]],
                                        black_a="A" in flags, black_b="B" in flags))
        facet_lines.append(reader.number)
        for e in edges:
            complex_.edges[e].facets.append(f)

    inside = set()
    labeled = False
    for c in range(reader.section("cells")):
        words = reader.next()
        if len(words) < 2:
            raise reader.error("invalid cell record")
        facets = reader.indices(reader.ints(words[2:]), len(complex_.facets), "facet")
        if len(facets) != reader.int(words[1]):
            raise reader.error("invalid cell record")
        if words[0] == "IN":
            inside.add(c)
        if words[0] != "-":
            labeled = True
        complex_.cells.append(BSPCell(facets))
    for facet, number in zip(complex_.facets, facet_lines):
        if any(c >= len(complex_.cells) for c in facet.cells):
            raise ParseError("cell index out of range", "line {}".format(number))
    complex_.inside = inside if labeled else None
    logger.info("read {}: {} vertices, {} cells".format(path, len(complex_.vertices), len(complex_.cells)))
    return complex_

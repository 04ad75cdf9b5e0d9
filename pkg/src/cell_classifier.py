"""
Inside/Outside Cell Classification.

This module provides:
- DualGraph: one node per cell plus OUTER, one arc per white facet
- build_dual_graph(): data costs from black facets, smooth costs from white ones
- min_cut_label(): exact binary labeling by s-t minimum cut
- labeling_energy(), dump_dual_graph()

A black facet whose covering normal points into a cell makes that cell
more likely OUT; one pointing out of the cell makes it more likely IN.
Costs are exact fractions built from double facet areas; the cut runs on
the same costs scaled to integers by their common denominator.
"""

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Collection, Dict, Hashable, Iterable, List, Set

import networkx as nx
from networkx.algorithms.flow import boykov_kolmogorov

from src.bsp_complex import OUTER, BSPComplex, FacetColor
from src.constraint_processing import Origin
from src.logger import attach_to_log
from src.numeric_kernel import Sign

logger = attach_to_log(__name__)

_SOURCE = "source"
_SINK = "sink"


class Label(Enum):
    IN = "IN"
    OUT = "OUT"


@dataclass
class DualGraph:
    """
    Cell adjacency graph.

    Attributes:
        graph: networkx Graph; nodes carry ``d_in`` / ``d_out`` data costs,
            edges carry the summed white facet area as ``weight``
        pin: Data cost that keeps OUTER labeled OUT
    """
    graph: nx.Graph = field(default_factory=nx.Graph)
    pin: Fraction = Fraction(1)

    def add_node(self, node: int) -> None:
        if node not in self.graph:
            self.graph.add_node(node, d_in=Fraction(0), d_out=Fraction(0))

    def add_data_cost(self, node: int, label: Label, cost: Fraction) -> None:
        self.add_node(node)
        key = "d_in" if label == Label.IN else "d_out"
        self.graph.nodes[node][key] += cost

    def add_arc(self, u: int, v: int, weight: Fraction) -> None:
        self.add_node(u)
        self.add_node(v)
        if self.graph.has_edge(u, v):
            self.graph[u][v]["weight"] += weight
        else:
            self.graph.add_edge(u, v, weight=weight)

    @property
    def cells(self) -> List[int]:
        return sorted(n for n in self.graph.nodes if n != OUTER)


@dataclass
class Labeling:
    labels: Dict[int, Label]
    energy: Fraction = Fraction(0)

    def inside(self) -> Set[int]:
        return {n for n, label in self.labels.items() if label == Label.IN and n != OUTER}


def _area(complex_: BSPComplex, f: int) -> Fraction:
    return Fraction(complex_.facet_area(f))


def _counts_for(facet, origins: Collection[Origin]) -> bool:
    return (Origin.A in origins and facet.black_a) or (Origin.B in origins and facet.black_b)


def build_dual_graph(complex_: BSPComplex,
                     origins: Collection[Origin] = (Origin.A, Origin.B)) -> DualGraph:
    """
    Dual graph of a colored complex.

    Only black facets flagged for one of ``origins`` add data costs, and only
    their covering constraints of those origins give normal directions. Black
    facets of other origins are treated like white ones: they add a smoothness
    arc between their two cells.
    """
    dual = DualGraph()
    dual.add_node(OUTER)
    for c in range(len(complex_.cells)):
        dual.add_node(c)

    total = Fraction(0)
    for f, facet in enumerate(complex_.facets):
        area = _area(complex_, f)
        total += area
        if facet.color == FacetColor.BLACK and _counts_for(facet, origins):
            covering = [cid for cid in facet.covering
                        if complex_.constraints[cid].origin in origins]
            for c in facet.cells:
                if c == OUTER:
                    continue
                v, _ = complex_.off_plane_vertex(c, f)
                sides = {complex_.vertex_side(v, complex_.constraints[cid].vertices) for cid in covering}
                if Sign.POSITIVE in sides:
                    dual.add_data_cost(c, Label.IN, area)
                if Sign.NEGATIVE in sides:
                    dual.add_data_cost(c, Label.OUT, area)
        else:
            dual.add_arc(facet.cells[0], facet.cells[1], area)

    dual.pin = total + 1
    dual.add_data_cost(OUTER, Label.IN, dual.pin)
    logger.debug("dual graph: {} nodes, {} arcs".format(
        dual.graph.number_of_nodes(), dual.graph.number_of_edges()))
    return dual


def labeling_energy(dual: DualGraph, labels: Dict[int, Label]) -> Fraction:
    """Data costs of the chosen labels plus the weight of every arc across labels."""
    energy = Fraction(0)
    for node, data in dual.graph.nodes(data=True):
        energy += data["d_in"] if labels[node] == Label.IN else data["d_out"]
    for u, v, weight in dual.graph.edges(data="weight"):
        if labels[u] != labels[v]:
            energy += weight
    return energy


def _common_scale(dual: DualGraph) -> int:
    """Smallest integer that turns every cost of the graph into an integer."""
    denominators = {Fraction(data[key]).denominator
                    for _, data in dual.graph.nodes(data=True) for key in ("d_in", "d_out")}
    denominators.update(Fraction(w).denominator for _, _, w in dual.graph.edges(data="weight"))
    return math.lcm(*denominators)


def _source_side(residual: nx.DiGraph) -> Set[Hashable]:
    """Nodes reachable from the source through unsaturated residual edges."""
    seen = {_SOURCE}
    queue = deque([_SOURCE])
    while queue:
        u = queue.popleft()
        for v, attr in residual[u].items():
            if v not in seen and attr["flow"] < attr["capacity"]:
                seen.add(v)
                queue.append(v)
    return seen


def min_cut_label(dual: DualGraph) -> Labeling:
    """
    Minimum-energy labeling.

    Costs are scaled to integers by their common denominator, so the cut is
    exact. Nodes reachable from the source in the residual network are IN:
    this is the smallest source side among minimum cuts, so ties resolve to OUT.
    """
    scale = _common_scale(dual)

    def capacity(cost: Fraction) -> int:
        cost = Fraction(cost)
        return cost.numerator * (scale // cost.denominator)

    flow = nx.DiGraph()
    flow.add_node(_SOURCE)
    flow.add_node(_SINK)
    for node in sorted(dual.graph.nodes):
        data = dual.graph.nodes[node]
        flow.add_node(node)
        if data["d_out"] > 0:
            flow.add_edge(_SOURCE, node, capacity=capacity(data["d_out"]))
        if data["d_in"] > 0:
            flow.add_edge(node, _SINK, capacity=capacity(data["d_in"]))
    for u, v, weight in sorted(dual.graph.edges(data="weight"), key=lambda e: (min(e[0], e[1]), max(e[0], e[1]))):
        if weight > 0:
            flow.add_edge(u, v, capacity=capacity(weight))
            flow.add_edge(v, u, capacity=capacity(weight))

    residual = boykov_kolmogorov(flow, _SOURCE, _SINK)
    value = Fraction(residual.graph["flow_value"], scale)
    source_side = _source_side(residual)
    labels = {node: Label.IN if node in source_side else Label.OUT for node in dual.graph.nodes}
    energy = labeling_energy(dual, labels)
    if energy != value:
        logger.warning("cut value {} differs from labeling energy {}".format(value, energy))
    logger.info("labeling: {} of {} cells inside, energy {:.6g}".format(
        sum(1 for n in labels if n != OUTER and labels[n] == Label.IN),
        len(labels) - 1, float(energy)))
    return Labeling(labels, energy)


def classify_cells(complex_: BSPComplex,
                   origins: Iterable[Origin] = (Origin.A, Origin.B)) -> Labeling:
    return min_cut_label(build_dual_graph(complex_, tuple(origins)))


def dump_dual_graph(dual: DualGraph, path) -> None:
    """
    Write the graph as text.

    Node lines are ``n <id> <d_in> <d_out>``, arc lines ``a <u> <v> <weight>``,
    all costs as floats.
    """
    with open(path, "w") as handle:
        for node in sorted(dual.graph.nodes):
            data = dual.graph.nodes[node]
            handle.write("n {} {!r} {!r}\n".format(node, float(data["d_in"]), float(data["d_out"])))
        for line in nx.generate_edgelist(dual.graph, data=False):
            u, v = (int(x) for x in line.split())
            handle.write("a {} {} {!r}\n".format(u, v, float(dual.graph[u][v]["weight"])))

"""
Meshing Pipeline.

This module provides:
- MeshingConfig: run options shared by every command
- PipelineStats: per-stage timings, peak memory and element counts
- create_meshing_pipeline(): conditioned input -> colored BSP complex
- run_pipeline(): run an operation and convert kernel errors into a result
"""

import time
import tracemalloc
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

from src.bsp_complex import BSPComplex, check_complex, init_from_tetmesh, subdivide_all
from src.constraint_processing import (
    ConditionedInput,
    build_virtual_constraints,
    detect_boundary_edges,
    map_constraints,
)
from src.delaunay import build_delaunay, check_delaunay
from src.errors import DegenerateInput, InvariantViolation, PolymeshError
from src.facet_coloring import finalize_grey_facets
from src.implicit_points import ExplicitPoint3
from src.logger import attach_to_log
from src.numeric_kernel import Sign, orient3d

logger = attach_to_log(__name__)


@dataclass
class MeshingConfig:
    """Options shared by all pipeline commands."""
    presort: bool = True
    seed: int = 0
    collect_stats: bool = False
    show_progress: bool = False
    check_invariants: bool = False


@dataclass
class PipelineStats:
    """Counters filled while the pipeline runs."""
    phases: Dict[str, float] = field(default_factory=dict)
    peak_memory: Dict[str, int] = field(default_factory=dict)
    counts: Dict[str, int] = field(default_factory=dict)
    virtual_paths: Counter = field(default_factory=Counter)

    def report(self) -> str:
        lines = ["phase            seconds    peak MiB"]
        for name, seconds in self.phases.items():
            peak = self.peak_memory.get(name)
            peak_text = "{:10.2f}".format(peak / 2 ** 20) if peak is not None else "         -"
            lines.append("{:<14} {:9.3f} {}".format(name, seconds, peak_text))
        for name in sorted(self.counts):
            lines.append("{:<24} {}".format(name, self.counts[name]))
        for name in sorted(self.virtual_paths):
            lines.append("virtual via {:<12} {}".format(name, self.virtual_paths[name]))
        return "\n".join(lines)


@dataclass
class PipelineResult:
    """Result object of one pipeline command."""
    success: bool
    command: str
    output: Any = None
    stats: Optional[PipelineStats] = None
    error_message: str = ""
    exit_code: int = 0


@contextmanager
def timed_stage(stats: PipelineStats, name: str, trace_memory: bool = False):
    """Time a stage and, when asked, record its peak traced memory."""
    started_tracing = False
    if trace_memory:
        if not tracemalloc.is_tracing():
            tracemalloc.start()
            started_tracing = True
        tracemalloc.reset_peak()
    logger.debug("stage {} started".format(name))
    start = time.perf_counter()
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start
        stats.phases[name] = stats.phases.get(name, 0.0) + elapsed
        if trace_memory:
            stats.peak_memory[name] = tracemalloc.get_traced_memory()[1]
            if started_tracing:
                tracemalloc.stop()
        logger.info("stage {} finished in {:.3f}s".format(name, elapsed))


def lift_flat_input(conditioned: ConditionedInput) -> List[ExplicitPoint3]:
    """
    Vertices for the tetrahedrization.

    When every input vertex lies on one plane an auxiliary vertex is added
    off that plane; it is referenced by no constraint.

    Raises:
        DegenerateInput: If no auxiliary vertex off the plane can be found
    """
    vertices = list(conditioned.vertices)
    a, b, c = (vertices[v] for v in conditioned.constraints[0].vertices)
    if any(orient3d(p, a, b, c) != Sign.ZERO for p in vertices):
        return vertices

    lows = [min(p[k] for p in vertices) for k in range(3)]
    highs = [max(p[k] for p in vertices) for k in range(3)]
    extent = max(max(h - l for l, h in zip(lows, highs)), 1.0)
    center = [(l + h) / 2.0 for l, h in zip(lows, highs)]
    for axis in range(3):
        for direction in (1.0, -1.0):
            coords = list(center)
            coords[axis] += direction * extent
            apex = ExplicitPoint3(*coords)
            if orient3d(apex, a, b, c) != Sign.ZERO:
                logger.warning("input is flat, added auxiliary vertex {}".format(tuple(apex)))
                vertices.append(apex)
                return vertices
    raise DegenerateInput("no auxiliary vertex found off the input plane")


def create_meshing_pipeline(conditioned: ConditionedInput,
                            config: Optional[MeshingConfig] = None,
                            stats: Optional[PipelineStats] = None) -> BSPComplex:
    """
    Build the colored complex of conditioned input.

    Stages: delaunay, virtual constraints, constraint map, split, color.

    Raises:
        DegenerateInput: From the tetrahedrization
        InvariantViolation: If ``config.check_invariants`` finds a problem
    """
    config = config or MeshingConfig()
    stats = stats if stats is not None else PipelineStats()
    trace = config.collect_stats
    constraints = list(conditioned.constraints)

    with timed_stage(stats, "delaunay", trace):
        vertices = lift_flat_input(conditioned)
        mesh = build_delaunay(vertices, presort=config.presort, seed=config.seed,
                              show_progress=config.show_progress)

    with timed_stage(stats, "virtual", trace):
        boundary = detect_boundary_edges(vertices, constraints)
        virtual = build_virtual_constraints(boundary, vertices, constraints, mesh, stats.virtual_paths)
        constraints.extend(virtual)

    with timed_stage(stats, "map", trace):
        cmap = map_constraints(mesh, constraints)

    with timed_stage(stats, "split", trace):
        complex_ = init_from_tetmesh(mesh, cmap, constraints)
        subdivide_all(complex_, show_progress=config.show_progress)

    with timed_stage(stats, "color", trace):
        coloring = finalize_grey_facets(complex_, show_progress=config.show_progress)

    stats.counts.update({
        "input vertices": conditioned.raw_vertex_count,
        "welded vertices": len(conditioned.vertices),
        "constraints": len(conditioned.constraints),
        "virtual constraints": len(virtual),
        "dropped degenerate": conditioned.dropped_degenerate,
        "dropped duplicates": conditioned.dropped_duplicates,
        "tets": len(mesh.finite_tets()),
        "cells": len(complex_.cells),
        "facets": len(complex_.facets),
        "bsp vertices": len(complex_.vertices),
        "lpi vertices": complex_.stats.lpi_vertices,
        "tpi vertices": complex_.stats.tpi_vertices,
        "grey by vertices": coloring.vertex_rule,
        "grey fast": coloring.fast,
        "grey slow": coloring.slow,
    })

    if config.check_invariants:
        with timed_stage(stats, "check", trace):
            problems = check_delaunay(mesh) + check_complex(complex_)
        if problems:
            for problem in problems:
                logger.error(problem)
            raise InvariantViolation("{} invariant violations, first: {}".format(len(problems), problems[0]))
    return complex_


def run_pipeline(command: str, operation: Callable[..., Any], *args,
                 config: Optional[MeshingConfig] = None) -> PipelineResult:
    """
    Run ``operation(*args, config=..., stats=...)`` and wrap the outcome.

    Kernel errors become an unsuccessful result carrying their exit code.
    """
    config = config or MeshingConfig()
    stats = PipelineStats()
    try:
        output = operation(*args, config=config, stats=stats)
    except PolymeshError as e:
        logger.error("{} failed: {}".format(command, e))
        return PipelineResult(False, command, stats=stats, error_message=str(e), exit_code=e.exit_code)
    return PipelineResult(True, command, output=output, stats=stats)

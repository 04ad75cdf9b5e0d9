import numpy as np
import pytest

from src.constraint_processing import condition_input
from src.errors import EmptyInput, InvariantViolation
from src.loaders.soup_loader import TriangleSoupFile
from src.numeric_kernel import Sign, orient3d
from src.pipelines import (
    MeshingConfig,
    PipelineStats,
    create_meshing_pipeline,
    lift_flat_input,
    run_pipeline,
    timed_stage,
)
from src.solid_modeling import make_solid


def _flat_soup() -> TriangleSoupFile:
    vertices = np.array([[0.0, 0.0, 2.0], [3.0, 0.0, 2.0], [3.0, 1.0, 2.0], [0.0, 1.0, 2.0]])
    return TriangleSoupFile(vertices, np.array([[0, 1, 2], [0, 2, 3]]), "off", "")


def test_volumetric_input_is_not_lifted(unit_cube):
    conditioned = condition_input(unit_cube)
    assert lift_flat_input(conditioned) == conditioned.vertices


def test_flat_input_gets_an_auxiliary_vertex():
    conditioned = condition_input(_flat_soup())
    vertices = lift_flat_input(conditioned)
    assert len(vertices) == 5
    assert orient3d(vertices[4], *vertices[:3]) != Sign.ZERO
    assert all(4 not in c.vertices for c in conditioned.constraints)


def test_timed_stage_accumulates():
    stats = PipelineStats()
    for _ in range(2):
        with timed_stage(stats, "work", trace_memory=True):
            list(range(1000))
    assert stats.phases["work"] > 0.0
    assert stats.peak_memory["work"] >= 0


def test_timed_stage_records_failed_stages():
    stats = PipelineStats()
    with pytest.raises(RuntimeError):
        with timed_stage(stats, "broken"):
            raise RuntimeError("boom")
    assert "broken" in stats.phases


def test_report_lists_phases_and_counts(unit_cube):
    stats = PipelineStats()
    create_meshing_pipeline(condition_input(unit_cube), MeshingConfig(collect_stats=True), stats)
    report = stats.report()
    for name in ("delaunay", "virtual", "map", "split", "color"):
        assert name in report
    assert stats.counts["tets"] >= 5
    assert stats.counts["virtual constraints"] == 0
    assert "welded vertices" in report


def test_invariant_checks_pass_on_valid_input(unit_cube):
    config = MeshingConfig(check_invariants=True, presort=False, seed=3)
    stats = PipelineStats()
    create_meshing_pipeline(condition_input(unit_cube), config, stats)
    assert "check" in stats.phases


def test_invariant_violation_is_raised(unit_cube, monkeypatch):
    monkeypatch.setattr("src.pipelines.check_complex", lambda complex_: ["cell 0 is not a closed shell"])
    with pytest.raises(InvariantViolation, match="closed shell"):
        create_meshing_pipeline(condition_input(unit_cube), MeshingConfig(check_invariants=True))


def test_run_pipeline_wraps_success(unit_cube):
    result = run_pipeline("repair", make_solid, unit_cube)
    assert result.success
    assert result.exit_code == 0
    complex_, skin = result.output
    assert not skin.is_empty


def test_run_pipeline_wraps_kernel_errors():
    def failing(*args, config, stats):
        raise EmptyInput("no non-degenerate triangle in input")

    result = run_pipeline("mesh", failing)
    assert not result.success
    assert result.exit_code == 1
    assert "non-degenerate" in result.error_message
    assert result.stats is not None


def test_run_pipeline_keeps_invariant_exit_code():
    def failing(*args, config, stats):
        raise InvariantViolation("walk stalled")

    assert run_pipeline("check", failing).exit_code == 2

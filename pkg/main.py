#!/usr/bin/env python3
"""
Polymesh

Defect-tolerant convex polyhedral meshing of triangle soups.

Usage:
    python main.py mesh model.off -o model.pvol --skin skin.off
    python main.py repair broken.stl -o fixed.off
    python main.py bool union a.off b.off -o union.off
    python main.py resolve soup.obj -o resolved.obj
    python main.py check model.off
"""

import argparse
import logging
import sys
from typing import List, Optional

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from src.errors import PolymeshError
from src.loaders import read_soup, write_surface, write_volume
from src.logger import attach_to_log, set_level
from src.numeric_kernel import Sign, orient3d
from src.pipelines import MeshingConfig, PipelineResult, run_pipeline
from src.solid_modeling import (
    BooleanOp,
    boolean,
    check_manifold,
    make_solid,
    resolve_self_intersections,
    surface_area,
    surface_volume,
)

logger = attach_to_log(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INVARIANT = 2

_OPS = {"union": BooleanOp.UNION, "inter": BooleanOp.INTERSECTION, "diff": BooleanOp.DIFFERENCE}


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with EXIT_INPUT."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, "{}: error: {}\n".format(self.prog, message))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        description="Convex polyhedral meshing, repair and booleans for triangle soups",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py mesh model.off -o model.pvol       # volume mesh
  python main.py repair broken.stl -o fixed.off     # closed solid
  python main.py bool diff a.off b.off -o d.obj     # regularized A - B
  python main.py check model.off                    # invariant report
        """
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--no-presort', action='store_true', help="Insert points in input order")
    common.add_argument('--seed', type=int, default=0, help="Shuffle the insertion order with this seed")
    common.add_argument('--stats', action='store_true', help="Print per-stage timings and memory")
    common.add_argument('--format', type=str, default=None, help="Force the input file format (off, obj, stl)")
    common.add_argument('--progress', action='store_true', help="Show progress bars")
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help="Debug logging")
    verbosity.add_argument('--quiet', action='store_true', help="Warnings and errors only")

    sub = parser.add_subparsers(dest='command', required=True)

    mesh = sub.add_parser('mesh', parents=[common], help="Build the labeled volume mesh")
    mesh.add_argument('input')
    mesh.add_argument('-o', '--output', help="PVOL volume output")
    mesh.add_argument('--skin', help="Surface output (OFF or OBJ)")

    repair = sub.add_parser('repair', parents=[common], help="Repair a soup into a closed solid")
    repair.add_argument('input')
    repair.add_argument('-o', '--output', required=True)

    bool_cmd = sub.add_parser('bool', parents=[common], help="Regularized boolean of two soups")
    bool_cmd.add_argument('op', choices=sorted(_OPS))
    bool_cmd.add_argument('input_a')
    bool_cmd.add_argument('input_b')
    bool_cmd.add_argument('-o', '--output', required=True)

    resolve = sub.add_parser('resolve', parents=[common], help="Resolve self-intersections")
    resolve.add_argument('input')
    resolve.add_argument('-o', '--output', required=True)

    check = sub.add_parser('check', parents=[common], help="Run the invariant suite")
    check.add_argument('input')
    return parser


def _config(args) -> MeshingConfig:
    return MeshingConfig(
        presort=not args.no_presort,
        seed=args.seed,
        collect_stats=args.stats,
        show_progress=args.progress,
        check_invariants=args.command == 'check',
    )


def _is_convex_soup(soup) -> bool:
    """True if every vertex lies on the closed inner side of every triangle plane."""
    points = [tuple(map(float, p)) for p in soup.vertices]
    for tri in soup.triangles:
        a, b, c = (points[i] for i in tri)
        sides = {orient3d(p, a, b, c) for p in points}
        if Sign.POSITIVE in sides and Sign.NEGATIVE in sides:
            return False
    return True


def _check_report(soup, surface) -> List[str]:
    """Manifold check plus a volume cross-check for convex inputs."""
    problems = check_manifold(surface)
    volume = surface_volume(surface)
    print("skin: {} faces, area {:.12g}, volume {:.12g}".format(
        len(surface.faces), surface_area(surface), volume))
    if _is_convex_soup(soup):
        try:
            hull = ConvexHull(np.asarray(soup.vertices, dtype=float))
        except (QhullError, ValueError) as e:
            logger.warning("convex hull cross-check skipped: {}".format(e))
        else:
            print("convex hull volume {:.12g}".format(hull.volume))
            if abs(hull.volume - volume) > 1e-9 * max(1.0, hull.volume):
                problems.append("skin volume {} differs from hull volume {}".format(volume, hull.volume))
    return problems


def _run(args) -> int:
    config = _config(args)
    if args.command == 'bool':
        soup_a = read_soup(args.input_a, args.format)
        soup_b = read_soup(args.input_b, args.format)
        result = run_pipeline('bool', boolean, soup_a, soup_b, _OPS[args.op], config=config)
    else:
        soup = read_soup(args.input, args.format)
        operation = resolve_self_intersections if args.command == 'resolve' else make_solid
        result = run_pipeline(args.command, operation, soup, config=config)

    if args.stats and result.stats is not None:
        print(result.stats.report())
    if not result.success:
        print("Error: {}".format(result.error_message), file=sys.stderr)
        return result.exit_code
    return _write_outputs(args, result, soup if args.command != 'bool' else None)


def _write_outputs(args, result: PipelineResult, soup) -> int:
    if args.command in ('mesh', 'repair', 'check'):
        complex_, surface = result.output
    else:
        complex_, surface = None, result.output

    if args.command == 'mesh':
        if args.output:
            write_volume(complex_, args.output)
        if args.skin:
            write_surface(surface, args.skin)
    elif args.command == 'check':
        problems = _check_report(soup, surface)
        for problem in problems:
            print("FAIL: {}".format(problem))
        if problems:
            return EXIT_INVARIANT
        print("all checks passed")
    else:
        write_surface(surface, args.output)
        print("{}: {} faces written to {}".format(args.command, len(surface.faces), args.output))
    return EXIT_OK


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Run the command line and return the exit code.

    0 on success, 1 on input errors, 2 on invariant violations.
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (None, 0) else EXIT_INPUT
    if args.verbose:
        set_level(logging.DEBUG)
    elif args.quiet:
        set_level(logging.WARNING)
    else:
        set_level(logging.INFO)

    try:
        return _run(args)
    except PolymeshError as e:
        print("Error: {}".format(e), file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print("Error: {}".format(e), file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

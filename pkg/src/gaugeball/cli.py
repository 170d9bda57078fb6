"""Command-line front end.

Exit codes: 0 success, 1 usage / I/O / validation error, 2 certification
failure (or oracle disagreement).
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path


from .errors import ConvergenceError, GeometryError, SceneError
from .examples import BUILTIN
from .oracle import GridSpec, grid_minimize
from .scene_io import canonical_json, emit_scene, emit_solution, parse_scene, parse_solution
from .solver import Solution, SolverConfig, certify, search_box, solve, uniqueness_probe
from .svg import render_svg
from .timefn import objective

EXIT_OK, EXIT_ERROR, EXIT_CERT = 0, 1, 2
ORACLE_RTOL = 1e-3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_ERROR)


class _Failure(Exception):
    pass


def _solver_flags(p):
    p.add_argument("--starts", type=int, default=16, help="number of descent starts")
    p.add_argument("--max-iters", type=int, default=5000, help="iteration cap per start")
    p.add_argument("--tol", type=float, default=1e-8, help="relative objective tolerance")
    p.add_argument("--seed", type=int, default=0, help="seed for the random starts")


def build_parser():
    parser = _Parser(prog="gaugeball", description="Smallest enclosing / intersecting balls under gauges.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve a scene and write the solution JSON")
    p.add_argument("scene")
    p.add_argument("-o", "--output", help="solution path (default: stdout)")
    p.add_argument("--svg", help="also write an SVG drawing (2-D scenes)")
    p.add_argument("--probe-uniqueness", action="store_true", help="classify the minimizer set")
    _solver_flags(p)

    p = sub.add_parser("verify", help="re-certify a solution against its scene")
    p.add_argument("scene")
    p.add_argument("solution")
    p.add_argument("--cert-tol", type=float, default=1e-6, help="certificate tolerance")

    p = sub.add_parser("oracle", help="compare the solver radius with the grid oracle")
    p.add_argument("scene")
    p.add_argument("--solution", help="solution to compare (default: solve afresh)")
    p.add_argument("--resolution", type=int, default=201)
    p.add_argument("--rounds", type=int, default=3)
    _solver_flags(p)

    p = sub.add_parser("render", help="draw a 2-D scene and its solution as SVG")
    p.add_argument("scene")
    p.add_argument("--solution", help="solution to draw (default: solve afresh)")
    p.add_argument("-o", "--output", required=True, help="SVG path")
    _solver_flags(p)

    p = sub.add_parser("examples", help="write the built-in example scenes")
    p.add_argument("directory")
    return parser


def _config(args):
    try:
        return SolverConfig(max_iters=args.max_iters, starts=args.starts, tol_obj=args.tol, seed=args.seed)
    except ValueError as exc:
        raise _Failure(str(exc)) from None


def _read(path):
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _Failure(f"cannot read {path}: {exc.strerror}") from None


def _write(path, data):
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise _Failure(f"cannot write {path}: {exc.strerror}") from None


def _load_solution(scene, path):
    rec = parse_solution(_read(path), scene.dimension)
    obj = objective(scene, rec.center)
    return Solution(rec.center, rec.radius, obj.active_indices, [], rec.converged)


def _cmd_solve(args):
    scene = parse_scene(_read(args.scene))
    config = _config(args)
    report = None
    if args.probe_uniqueness:
        report = uniqueness_probe(scene, config)
        sol = report.solution
    else:
        sol = solve(scene, config)
    _write(args.output, emit_solution(sol, report))
    if args.svg:
        _write(args.svg, render_svg(scene, sol))
    if not sol.certificate.passed:
        sys.stderr.write(f"certification failed: worst violation {sol.certificate.worst_violation:.3e}\n")
        return EXIT_CERT
    return EXIT_OK


def _cmd_verify(args):
    scene = parse_scene(_read(args.scene))
    sol = _load_solution(scene, args.solution)
    cert = certify(scene, sol, args.cert_tol)
    _write(None, canonical_json(cert.to_dict()))
    if not cert.passed:
        sys.stderr.write(f"certification failed: worst violation {cert.worst_violation:.3e}\n")
        return EXIT_CERT
    return EXIT_OK


def _cmd_oracle(args):
    scene = parse_scene(_read(args.scene))
    if args.solution:
        sol = _load_solution(scene, args.solution)
    else:
        sol = solve(scene, _config(args))
    lo, hi = search_box(scene)
    try:
        grid = GridSpec(lo, hi, args.resolution, args.rounds)
    except ValueError as exc:
        raise _Failure(str(exc)) from None
    point, value = grid_minimize(scene, grid)
    gap = abs(float(sol.radius) - value)
    limit = ORACLE_RTOL * (1.0 + float(sol.radius))
    _write(None, canonical_json({"oracle_point": point, "oracle_value": value,
                                 "solver_radius": float(sol.radius), "discrepancy": gap,
                                 "agrees": bool(gap <= limit)}))
    return EXIT_OK if gap <= limit else EXIT_CERT


def _cmd_render(args):
    scene = parse_scene(_read(args.scene))
    sol = _load_solution(scene, args.solution) if args.solution else solve(scene, _config(args))
    _write(args.output, render_svg(scene, sol))
    return EXIT_OK


def _cmd_examples(args):
    out = Path(args.directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _Failure(f"cannot create {out}: {exc.strerror}") from None
    for name, build in BUILTIN.items():
        _write(out / f"{name}.json", emit_scene(build()))
    return EXIT_OK


def _show_warning(message, category, filename, lineno, file=None, line=None):
    sys.stderr.write(f"warning: {message}\n")


COMMANDS = {"solve": _cmd_solve, "verify": _cmd_verify, "oracle": _cmd_oracle,
            "render": _cmd_render, "examples": _cmd_examples}


def run(argv=None):
    """Run one command and return its exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            warnings.showwarning = _show_warning
            return COMMANDS[args.command](args)
    except (_Failure, SceneError, GeometryError, ConvergenceError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


def main():
    sys.exit(run())

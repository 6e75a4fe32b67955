"""Command-line interface: ``mesovoids {generate,solve,eval,validate,study}``.

Exit codes: 0 success, 1 a validation check failed, 2 input error,
3 gate or capacity error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .cloud import DEFAULT_GATE_C, Ball, generate_cloud
from .elastic import LameParams
from .errors import GateError, InputError, NumericalError
from .field import evaluate_arrays
from .solver import assemble_system, solve_coefficients, system_diagnostics
from .validation import default_problem, residual_convergence_study, run_suite

log = logging.getLogger("mesovoids")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_GATE = 3
EXIT_NUMERICAL = 4


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _vec3(text: str) -> list[float]:
    v = _floats(text)
    if len(v) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return v


def _load_problem(args):
    if args.cloud is None and args.background is None:
        return default_problem()
    if args.cloud is None or args.background is None:
        raise InputError("give both --cloud and --background, or neither for the default problem")
    cloud = io.load_cloud(args.cloud, args.gate_c)
    return cloud, io.load_background(args.background, cloud.params)


def cmd_generate(args) -> int:
    params = LameParams(args.lam, args.mu)
    region = Ball(args.center, args.region_radius)
    cloud = generate_cloud(region, args.n, args.d, args.eps, args.seed, params, args.gate_c)
    io.save_cloud(cloud, args.out)
    log.info("wrote %d voids to %s", len(cloud), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    cloud = io.load_cloud(args.cloud, args.gate_c)
    bg = io.load_background(args.background, cloud.params)
    system = assemble_system(cloud, bg)
    c = solve_coefficients(system, args.method)
    diag = system_diagnostics(system, c)
    io.save_coefficients(c, args.out, args.method)
    diag_path = args.diagnostics or Path(args.out).with_suffix(".diagnostics.json")
    io.save_json({"method": args.method, **diag.to_dict()}, diag_path)
    log.info("||PM||_inf = %.6g, relative residual = %.3g", diag.pm_norm_inf, diag.relative_residual or 0.0)
    return EXIT_OK


def cmd_eval(args) -> int:
    cloud = io.load_cloud(args.cloud, args.gate_c)
    bg = io.load_background(args.background, cloud.params)
    c = io.load_coefficients(args.coeffs)
    if c.size != 6 * len(cloud):
        raise InputError(f"{args.coeffs} holds {c.size // 6} coefficient rows for a cloud of {len(cloud)} voids")
    grid = io.load_grid(args.grid)
    u, codes = evaluate_arrays(grid, cloud, bg, c, args.kind, args.workers)
    io.write_field(args.out, grid.points, u, codes, args.format)
    log.info("wrote %d points to %s", len(grid), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    cloud, bg = _load_problem(args)
    reports = run_suite(cloud, bg, args.seed)
    passed = all(r.passed for r in reports)
    io.save_json({"passed": passed, "checks": [r.to_dict() for r in reports]}, args.report)
    for r in reports:
        log.info("%-28s %s measured=%.3g threshold=%.3g", r.name, "PASS" if r.passed else "FAIL", r.measured, r.threshold)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_study(args) -> int:
    cloud, bg = _load_problem(args)
    eps = sorted(args.eps_list, reverse=True)
    study = residual_convergence_study(cloud, bg, eps, args.gate_c, args.method)
    passed = study.fit is not None and study.fit.slope >= args.min_slope
    report = {
        "passed": passed,
        "min_slope": args.min_slope,
        "study": study.to_dict(),
    }
    io.save_json(report, args.report)
    for note in study.notes:
        log.warning(note)
    if study.fit is not None:
        log.info("residual slope %.4f (threshold %.3g)", study.fit.slope, args.min_slope)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mesovoids", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="repeat for more detail")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="seeded random void cloud -> cloud JSON")
    g.add_argument("--n", type=int, required=True, help="number of voids")
    g.add_argument("--d", type=float, required=True, help="half the minimal centre separation")
    g.add_argument("--eps", type=float, required=True, help="void radius")
    g.add_argument("--region-radius", type=float, default=1.0)
    g.add_argument("--center", type=_vec3, default=[0.0, 0.0, 0.0], help="region centre x,y,z")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--lambda", dest="lam", type=float, default=1.0)
    g.add_argument("--mu", type=float, default=1.0)
    g.add_argument("--gate-c", type=float, default=DEFAULT_GATE_C)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve the interaction system -> coefficients JSON")
    s.add_argument("--cloud", required=True)
    s.add_argument("--background", required=True)
    s.add_argument("--method", choices=("dense", "neumann"), default="dense")
    s.add_argument("--gate-c", type=float, default=DEFAULT_GATE_C)
    s.add_argument("--out", required=True)
    s.add_argument("--diagnostics", help="diagnostics JSON path (default: <out stem>.diagnostics.json)")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("eval", help="evaluate the displacement on a grid -> CSV or VTK")
    e.add_argument("--cloud", required=True)
    e.add_argument("--coeffs", required=True)
    e.add_argument("--background", required=True)
    e.add_argument("--grid", required=True, help="grid JSON: explicit points or origin/spacing/counts")
    e.add_argument("--kind", choices=("uniform", "far"), default="uniform")
    e.add_argument("--format", choices=("csv", "vtk"), default="csv")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--gate-c", type=float, default=DEFAULT_GATE_C)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_eval)

    for name, func, text in (
        ("validate", cmd_validate, "run every numerical check -> JSON report"),
        ("study", cmd_study, "boundary-residual convergence study -> JSON report"),
    ):
        v = sub.add_parser(name, help=text)
        v.add_argument("--cloud", help="cloud JSON (default: built-in 5-void problem)")
        v.add_argument("--background", help="background JSON (default: built-in pairs)")
        v.add_argument("--gate-c", type=float, default=DEFAULT_GATE_C)
        v.add_argument("--report", required=True)
        if name == "validate":
            v.add_argument("--seed", type=int, default=0, help="seed for random probe points")
        else:
            v.add_argument("--eps-list", type=_floats, required=True, help="comma-separated void radii; radii above the stored ones may break clearance")
            v.add_argument("--method", choices=("dense", "neumann"), default="dense")
            v.add_argument("--min-slope", type=float, default=0.9)
        v.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except GateError as exc:
        print(f"mesovoids: gate error: {exc}", file=sys.stderr)
        return EXIT_GATE
    except InputError as exc:
        print(f"mesovoids: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"mesovoids: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"mesovoids: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry points: solve / refine / sweep.

Exit codes: 0 success, 2 configuration error, 3 closure (sonic/range)
failure, 4 iteration non-convergence, 5 internal consistency failure.
"""

import argparse
import sys

from .config import ProblemConfig
from .errors import (
    ClosureError,
    ConfigError,
    ConsistencyError,
    ExitRangeError,
    IterationError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CLOSURE = 3
EXIT_NONCONVERGENCE = 4
EXIT_INTERNAL = 5


def _parser():
    parser = argparse.ArgumentParser(
        prog="cdnozzle",
        description="Two-layer subsonic nozzle flow with a free contact discontinuity",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="single free-boundary solve")
    solve.add_argument("config", help="path to a JSON config file")
    solve.add_argument("--out", default=None, help="artifact output directory")
    solve.add_argument("--threads", type=int, default=1)

    refine = sub.add_parser("refine", help="grid refinement study")
    refine.add_argument("config")
    refine.add_argument("--grids", default=None,
                        help="comma-separated grid sizes, e.g. 33,65,129")
    refine.add_argument("--out", default=None)
    refine.add_argument("--threads", type=int, default=1)

    sweep = sub.add_parser("sweep", help="perturbation amplitude sweep")
    sweep.add_argument("config")
    sweep.add_argument("--amps", default=None,
                       help="comma-separated descending amplitudes")
    sweep.add_argument("--out", default=None)
    sweep.add_argument("--threads", type=int, default=1)
    return parser


def _run_solve(args):
    from . import runner

    config = ProblemConfig.load(args.config)
    report = runner.run(config, out_dir=args.out, threads=args.threads)
    print(f"sigma = {report.sigma:.6e}")
    print(f"outer iterations = {report.outer_iterations} "
          f"(backtracks {report.backtracks})")
    print(f"final |Q| = {report.outer_residuals[-1]:.3e}  "
          f"corner defect = {report.corner_defect:.3e}")
    print(f"|U - U_b| = {report.du_sup:.6e}   |g_cd| = {report.gcd_sup:.6e}")
    print(f"R-H: pressure {report.rh['pressure_jump_max']:.3e}, tangency "
          f"{max(report.rh['tangency_upper_max'], report.rh['tangency_lower_max']):.3e}")
    print(f"mass defect {report.conservation['mass_defect_max']:.3e}, "
          f"slip {report.conservation['slip_max']:.3e}, "
          f"max Mach {report.mach_max:.4f}")
    print(f"elapsed {report.elapsed_seconds:.2f} s")
    return EXIT_OK


def _run_refine(args):
    from . import runner

    config = ProblemConfig.load(args.config)
    grids = None
    if args.grids:
        grids = [int(g) for g in args.grids.split(",")]
    rows, orders = runner.refine(config, grids=grids, out_dir=args.out,
                                 threads=args.threads)
    print("n      pressure_jump  tangency      mass_defect   wall_defect   transport")
    for row in rows:
        print(f"{row['n']:<6d} {row['pressure_jump']:<13.3e} {row['tangency']:<13.3e} "
              f"{row['mass_defect']:<13.3e} {row['wall_defect']:<13.3e} "
              f"{row['transport']:<13.3e}")
    print("orders:", {k: round(v, 2) for k, v in orders.items()})
    return EXIT_OK


def _run_sweep(args):
    from . import runner

    config = ProblemConfig.load(args.config)
    amps = None
    if args.amps:
        amps = [float(a) for a in args.amps.split(",")]
    rows, errors = runner.sweep(config, amplitudes=amps, out_dir=args.out,
                                threads=args.threads)
    print("sigma         dU/sigma      gcd/sigma     iterations")
    for row in rows:
        print(f"{row['sigma']:<13.4e} {row['dU_over_sigma']:<13.4e} "
              f"{row['gcd_over_sigma']:<13.4e} {row['outer_iterations']}")
    if errors:
        print("failed rows:")
        for amplitude, message in errors:
            print(f"  amplitude {amplitude}: {message}")
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def main(argv=None):
    args = _parser().parse_args(argv)
    handlers = {"solve": _run_solve, "refine": _run_refine, "sweep": _run_sweep}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ClosureError, ExitRangeError) as exc:
        print(f"closure failure: {exc}", file=sys.stderr)
        return EXIT_CLOSURE
    except IterationError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except ConsistencyError as exc:
        print(f"internal consistency failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

import argparse
import logging
import os
import sys
import unittest

from harness_modules import (
    DEFAULT_WORKERS,
    atom_scan,
    build_source,
    load_config,
    rate_fits_by_point,
    run_scenario,
    write_detections,
)
from local_logger import RunLogger
from utils import ConfigError, MissingCoefficientError, NumericFailure, WienerError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2

SELFTEST_MODULES = [
    "group",
    "measure",
    "fourier",
    "special",
    "quadrature",
    "folner",
    "weighted",
    "torus_br",
    "finite_oracle",
    "harness",
    "acceptance",
]

logger = logging.getLogger(__name__)


def run_command(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config = config.model_copy(update={"seed": args.seed})
    records = run_scenario(config, out=args.out, workers=args.workers, plot_data=args.plot_data)
    for point, fit in rate_fits_by_point(records).items():
        if fit.exact:
            logger.info("x=%s: exact recovery", point)
        else:
            logger.info("x=%s: error ~ index^%.3f (residual %.3g)", point, fit.slope, fit.residual)
    return EXIT_OK


def scan_command(args) -> int:
    config = load_config(args.config)
    scan = config.scan
    index = args.index if args.index is not None else (scan.index if scan and scan.index else config.sweep[-1])
    grid = args.grid if args.grid is not None else (scan.grid if scan else 0.01)
    threshold = args.threshold if args.threshold is not None else (scan.threshold if scan else 0.1)
    source = build_source(config)
    detections = atom_scan(source, config.method, index, grid, threshold, box=scan.box if scan else None)
    for det in detections:
        print(f"atom at {det.location}: weight {det.weight:.6g}")
    if args.out:
        write_detections(detections, args.out, config.group.to_context().dim)
    return EXIT_OK


def selftest_command(args) -> int:
    root = os.path.dirname(os.path.abspath(__file__))
    loader = unittest.TestLoader()
    failed = 0
    for name in SELFTEST_MODULES:
        suite = loader.discover(os.path.join(root, "test_cases"), pattern=f"test_{name}.py", top_level_dir=root)
        with open(os.devnull, "w") as sink:
            result = unittest.TextTestRunner(stream=sink, verbosity=0).run(suite)
        ok = result.wasSuccessful() and result.testsRun > 0
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name} ({result.testsRun} tests)")
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


class CommandLineParser(argparse.ArgumentParser):
    """Reports usage errors as ConfigError so they map to EXIT_CONFIG."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise ConfigError(message, "argv")


def add_common_options(parser, defaults=True):
    """Options accepted before or after the subcommand; subcommand copies leave the top-level value alone."""
    def default(value):
        return value if defaults else argparse.SUPPRESS

    parser.add_argument("-s", "--seed", dest="seed", action="store", default=default(None), type=int, required=False, help="Override the scenario seed for random probe points")
    parser.add_argument("-w", "--workers", dest="workers", action="store", default=default(DEFAULT_WORKERS), type=int, required=False, help="Thread pool size for probe points")
    parser.add_argument("-l", "--log-file", dest="log_file", action="store", default=default(None), required=False, help="Also write debug logs to this file")
    parser.add_argument("-v", "--verbose", dest="verbose", action="store_true", default=default(False), required=False, help="Show debug logs on the console")


def build_parser() -> argparse.ArgumentParser:
    parser = CommandLineParser(description="Recover atoms of a measure from averages of its Fourier coefficients",
                               formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    add_common_options(parser)
    common = CommandLineParser(add_help=False)
    add_common_options(common, defaults=False)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="Sweep a scenario and write one CSV row per (index, point)",
                         formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    run.add_argument("-c", "--config", dest="config", action="store", required=True, help="Scenario JSON file")
    run.add_argument("-o", "--out", dest="out", action="store", default=None, required=False, help="Output CSV path")
    run.add_argument("-p", "--plot-data", dest="plot_data", action="store_true", default=False, required=False, help="Replace the sweep by a dense geometric grid between its ends")
    run.set_defaults(handler=run_command)

    scan = sub.add_parser("scan", parents=[common], help="Locate atoms as peaks of the average over a grid",
                          formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    scan.add_argument("-c", "--config", dest="config", action="store", required=True, help="Scenario JSON file")
    scan.add_argument("-n", "--index", dest="index", action="store", default=None, type=float, required=False, help="Averaging index; defaults to scan.index or the last sweep entry")
    scan.add_argument("-g", "--grid", dest="grid", action="store", default=None, type=float, required=False, help="Grid step h")
    scan.add_argument("-t", "--threshold", dest="threshold", action="store", default=None, type=float, required=False, help="Detection threshold tau")
    scan.add_argument("-o", "--out", dest="out", action="store", default=None, required=False, help="Output CSV path for detections")
    scan.set_defaults(handler=scan_command)

    selftest = sub.add_parser("selftest", help="Run the bundled test modules and report PASS/FAIL per module")
    selftest.set_defaults(handler=selftest_command)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError:
        return EXIT_CONFIG
    with RunLogger(args.log_file, logging.DEBUG if args.verbose else logging.INFO) as run_log:
        run_log.log_info(f"command: {args.command}")
        try:
            return args.handler(args)
        except (ConfigError, MissingCoefficientError) as e:
            run_log.log_error(f"configuration error: {e}")
            return EXIT_CONFIG
        except NumericFailure as e:
            run_log.log_error(f"numeric failure: {e}")
            return EXIT_NUMERIC
        except WienerError as e:
            run_log.log_error(f"invalid input: {e}")
            return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

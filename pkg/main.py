#!/usr/bin/env python3
"""
Teleportation-based quantum critical point detector - command line
Scans spin-chain correlators, writes CSV tables and extrapolates critical points
"""

import argparse
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional

# Add current directory to path
sys.path.insert(0, str(Path(__file__).parent))

from config.presets import EXTREMUM_SENSES, MODEL_PRESETS, OBSERVABLES
from config.run_config import RunConfig, Window
from core.exceptions import ConfigError, QcpError, VerificationError
from core.logger import logger
from utils.helpers import parse_float_list, parse_range

EXIT_OK = 0
EXIT_USAGE = ConfigError.exit_code
EXIT_NUMERICAL = QcpError.exit_code
EXIT_VERIFICATION = VerificationError.exit_code


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors surface as ConfigError so main() owns the exit code"""

    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")


def _add_run_options(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="YAML run config (flags override its values)")
    parser.add_argument("--preset", choices=sorted(MODEL_PRESETS), help="start from a shipped scenario")
    parser.add_argument("--model", choices=["xxz", "xy"])
    parser.add_argument("--h", type=float, help="XXZ longitudinal field")
    parser.add_argument("--delta", type=float, help="XXZ anisotropy")
    parser.add_argument("--lambda", dest="lam", type=float, help="XY coupling")
    parser.add_argument("--gamma", type=float, help="XY anisotropy")
    parser.add_argument("--delta-range", metavar="A:B")
    parser.add_argument("--lambda-range", metavar="A:B")
    parser.add_argument("--gamma-range", metavar="A:B")
    parser.add_argument("--step", type=float)
    parser.add_argument("--kt", action="append", metavar="KT", help="temperature, repeatable or comma separated")
    parser.add_argument("--provider", metavar="ed:<L>|ff|auto")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", help="output CSV path")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="qcp-detector",
        description="Detect quantum critical points at finite temperature through teleportation efficiency",
    )
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    subparsers = parser.add_subparsers(dest="command", required=True)

    scan_parser = subparsers.add_parser("scan", help="CSV of correlators and efficiencies along one parameter")
    _add_run_options(scan_parser)

    detect_parser = subparsers.add_parser("detect", help="extrema per temperature and extrapolation to kT=0")
    _add_run_options(detect_parser)
    detect_parser.add_argument("--observable", action="append", choices=OBSERVABLES)
    detect_parser.add_argument("--order", type=int, choices=[0, 1, 2],
                               help="0 locates the extremum of the observable itself")
    detect_parser.add_argument("--extremum", choices=list(EXTREMUM_SENSES),
                               help="peak direction; auto is max for distances, min for fidelities at order 0")
    detect_parser.add_argument("--window", action="append", metavar="A:B")
    detect_parser.add_argument("--fit", choices=["linear", "quadratic"])

    crossings_parser = subparsers.add_parser("crossings", help="set crossings and sign changes of z^3 - z zz")
    _add_run_options(crossings_parser)
    crossings_parser.add_argument("--refine", choices=["exact", "interp"])

    correlators_parser = subparsers.add_parser("correlators", help="raw correlators z, xx, yy, zz")
    _add_run_options(correlators_parser)

    verify_parser = subparsers.add_parser("verify", help="oracle and invariant checks")
    verify_parser.add_argument("--level", choices=["quick", "full"], default="quick")
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """Preset or config file first, then command-line overrides"""
    if args.config:
        run = RunConfig.from_yaml(args.config)
        if args.preset:
            logger.warning("--preset ignored because --config was given")
    elif args.preset:
        run = RunConfig.from_preset(args.preset)
    else:
        run = RunConfig()

    if args.model:
        if args.model != run.model:
            run.params = {}
            run.axis = "delta" if args.model == "xxz" else "lambda"
            run.start = run.stop = None
            run.windows = []
        run.model = args.model
    for name, value in (("h", args.h), ("delta", args.delta), ("lambda", args.lam), ("gamma", args.gamma)):
        if value is not None:
            run.params[name] = value

    ranges = [(axis, getattr(args, f"{axis}_range")) for axis in ("delta", "lambda", "gamma")]
    given = [(axis, text) for axis, text in ranges if text]
    if len(given) > 1:
        raise ConfigError("Give only one of --delta-range, --lambda-range, --gamma-range")
    if given:
        axis, text = given[0]
        run.axis = axis
        run.start, run.stop = parse_range(text)
        run.params.pop(axis, None)

    if args.step is not None:
        run.step = args.step
    if args.kt:
        run.kts = parse_float_list(args.kt)
    if args.provider:
        run.provider = args.provider
    if args.workers is not None:
        run.workers = args.workers
    if args.out:
        run.out = args.out

    if getattr(args, "observable", None):
        run.observables = list(args.observable)
    if getattr(args, "window", None):
        order = 1 if args.order is None else args.order
        run.windows = [Window(*parse_range(text), order=order, fit_kind=args.fit or "linear",
                              sense=args.extremum or "auto")
                       for text in args.window]
    else:
        if getattr(args, "order", None) is not None:
            for window in run.windows:
                window.order = args.order
        if getattr(args, "extremum", None):
            for window in run.windows:
                window.sense = args.extremum
        if getattr(args, "fit", None):
            for window in run.windows:
                window.fit_kind = args.fit
    if getattr(args, "refine", None):
        run.refine = args.refine
    return run


# === Commands ===

def cmd_scan(run: RunConfig) -> int:
    from services.pipeline import DetectionPipeline
    DetectionPipeline(run.validate("scan")).run_scan()
    return EXIT_OK


def cmd_detect(run: RunConfig) -> int:
    from services.pipeline import DetectionPipeline
    DetectionPipeline(run.validate("detect")).run_detect()
    return EXIT_OK


def cmd_crossings(run: RunConfig) -> int:
    from services.pipeline import DetectionPipeline
    DetectionPipeline(run.validate("crossings")).run_crossings()
    return EXIT_OK


def cmd_correlators(run: RunConfig) -> int:
    from services.pipeline import DetectionPipeline
    DetectionPipeline(run.validate("correlators")).run_correlators()
    return EXIT_OK


def cmd_verify(level: str) -> int:
    from services.verification import run_verification
    report = run_verification(level)
    if not report.passed:
        names = ", ".join(check.name for check in report.failures)
        raise VerificationError(f"{len(report.failures)} check(s) failed: {names}")
    return EXIT_OK


COMMANDS = {
    "scan": cmd_scan,
    "detect": cmd_detect,
    "crossings": cmd_crossings,
    "correlators": cmd_correlators,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function"""
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        logger.error(str(e))
        return EXIT_USAGE

    if args.log_level:
        logger.set_level(args.log_level)

    logger.info("=" * 60)
    logger.info(f"qcp-detector {args.command} - {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
    logger.info("=" * 60)

    try:
        if args.command == "verify":
            return cmd_verify(args.level)
        return COMMANDS[args.command](build_run_config(args))

    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE
    except VerificationError as e:
        logger.error(f"Verification failed: {e}")
        return EXIT_VERIFICATION
    except QcpError as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        return EXIT_NUMERICAL
    except Exception as e:
        logger.critical(f"System failed: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

"""
Main Entry Point - kbound
=========================

Computes the greatest (or least) parameter value k for which a polynomial
family satisfies F(k, x) >= 0 for all admissible x, as an exact real
algebraic number.

Usage:
    python main.py --input data/problems/ex1.kb --digits 9
    python main.py --input data/problems/ex2.kb --mode monotone --format json
    python main.py --input data/problems/ex1.kb --direction min --trace

Exit codes:
    0  optimum found, or the parameter is unbounded
    1  no parameter value is feasible
    2  undecided (reasons listed in the report)
    3  parse error or bad command line
    4  time limit reached
"""

import argparse
import logging
import os
import signal
import sys
import threading
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional

from dotenv import load_dotenv

# Add project root to path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from src.algebra.realroots import restrict_defpoly
from src.engines.optimizer_engine import (
    Direction,
    OptimizationResult,
    OptimizerEngine,
    SolveMode,
    SolveStatus,
    SolverConfig,
)
from src.errors import ProblemParseError, ResourceLimitError, UsageError
from src.frontend.problem_parser import parse_polynomial, parse_problem
from src.frontend.report import emit_result

load_dotenv()

logger = logging.getLogger("kbound")


# ============================================================================
# CONFIGURATION
# ============================================================================

class Config:
    """Central defaults; each can be overridden from the environment (.env)."""

    DEFAULT_DIGITS = int(os.getenv("KBOUND_DIGITS", "10"))
    TIMEOUT_SECONDS = int(os.getenv("KBOUND_TIMEOUT_SECONDS", "1800"))
    MODE = os.getenv("KBOUND_MODE", "auto")
    LOG_LEVEL = os.getenv("KBOUND_LOG_LEVEL", "WARNING")

    # Output settings
    OUTPUT_DIR = os.getenv("KBOUND_OUTPUT_DIR", "output")
    DEFAULT_FORMAT = "text"


EXIT_CODES = {
    SolveStatus.FOUND: 0,
    SolveStatus.UNBOUNDED: 0,
    SolveStatus.INFEASIBLE: 1,
    SolveStatus.UNDECIDED: 2,
}
EXIT_UNEXPECTED = 2
EXIT_USAGE = 3
EXIT_RESOURCE_LIMIT = 4


def setup_logging(level: str = Config.LOG_LEVEL):
    """Log to stderr so reports on stdout stay clean."""
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.WARNING),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


@contextmanager
def time_limit(seconds: int):
    """Raise ResourceLimitError after ``seconds`` (POSIX main thread only)."""
    usable = (seconds and seconds > 0 and hasattr(signal, 'SIGALRM')
              and threading.current_thread() is threading.main_thread())
    if not usable:
        yield
        return

    def on_alarm(signum, frame):
        raise ResourceLimitError(f"time limit of {seconds} s reached")

    previous = signal.signal(signal.SIGALRM, on_alarm)
    signal.alarm(seconds)
    try:
        yield
    finally:
        signal.alarm(0)
        signal.signal(signal.SIGALRM, previous)


# ============================================================================
# CLI ENTRY POINT
# ============================================================================

class KboundArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with the parse-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments."""
    parser = KboundArgumentParser(
        prog="kbound",
        description="Exact optimal parameter of a polynomial inequality family"
    )

    parser.add_argument(
        '--input', '-i',
        type=str,
        required=True,
        help='Problem file (direction/parameter/objective/vars lines)'
    )

    parser.add_argument(
        '--direction',
        choices=['max', 'min'],
        help='Override the direction given in the problem file'
    )

    parser.add_argument(
        '--digits', '-d',
        type=int,
        default=Config.DEFAULT_DIGITS,
        help=f'Decimal digits of approximations (default: {Config.DEFAULT_DIGITS})'
    )

    parser.add_argument(
        '--mode',
        choices=[m.value for m in SolveMode],
        default=Config.MODE,
        help=f'Candidate classification strategy (default: {Config.MODE})'
    )

    parser.add_argument(
        '--elim-order',
        type=str,
        help='Comma-separated elimination order, using the names after nonneg substitution'
    )

    parser.add_argument(
        '--timeout-seconds',
        type=int,
        default=Config.TIMEOUT_SECONDS,
        help=f'Time limit, 0 disables it (default: {Config.TIMEOUT_SECONDS})'
    )

    parser.add_argument(
        '--trace',
        action='store_true',
        help='Include the projection trace in the report'
    )

    parser.add_argument(
        '--format',
        choices=['json', 'text'],
        default=Config.DEFAULT_FORMAT,
        help=f'Report format (default: {Config.DEFAULT_FORMAT})'
    )

    parser.add_argument(
        '--check-root-of',
        type=str,
        metavar='POLY',
        help='Also report whether the optimum is a root of this polynomial in the parameter'
    )

    parser.add_argument(
        '--output', '-o',
        type=str,
        help=f'Write the report to a file; bare file names go to {Config.OUTPUT_DIR}/'
    )

    parser.add_argument(
        '--log-level',
        type=str,
        default=Config.LOG_LEVEL,
        help=f'Logging level (default: {Config.LOG_LEVEL})'
    )

    args = parser.parse_args(argv)
    if args.digits < 1:
        parser.error("--digits must be positive")
    return args


def check_root(result: OptimizationResult, text: str) -> Dict:
    """Outcome of --check-root-of for a solved result."""
    q = parse_polynomial(text)
    extra = [v for v in q.used_variables() if v != result.param]
    if extra:
        raise UsageError(f"--check-root-of polynomial must be in {result.param!r} only, found {extra}")
    check = {'polynomial': q.render(), 'is_root': False, 'defining_polynomial': None}
    if result.optimum is None:
        return check
    restricted = restrict_defpoly(result.optimum, q)
    if restricted is not None:
        check['is_root'] = True
        check['defining_polynomial'] = restricted.defpoly.render()
    return check


def _output_path(name: str) -> Path:
    path = Path(name)
    if path.parent == Path('.') and not name.startswith('.'):
        path = Path(Config.OUTPUT_DIR) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Run one solve from the command line and return the exit code."""
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    setup_logging(args.log_level)

    try:
        text = Path(args.input).read_text(encoding='utf-8')
        spec = parse_problem(text)
        if args.direction:
            spec = replace(spec, direction=Direction(args.direction))

        elim_order = [v.strip() for v in args.elim_order.split(',')] if args.elim_order else None
        config = SolverConfig(mode=SolveMode(args.mode), elim_order=elim_order)
        logger.info(f"Solving {args.input} ({spec.direction.value} {spec.param}, mode {args.mode})")

        with time_limit(args.timeout_seconds):
            result = OptimizerEngine(config).solve(spec)
            root_check = check_root(result, args.check_root_of) if args.check_root_of else None
            report = emit_result(result, args.format, args.digits, args.trace, root_check)

        if args.output:
            path = _output_path(args.output)
            path.write_text(report, encoding='utf-8')
            logger.info(f"Report written to {path}")
        else:
            sys.stdout.write(report)
        return EXIT_CODES[result.status]

    except ProblemParseError as e:
        logger.error(f"Parse error in {args.input}: {e}")
        print(f"[ERROR] {args.input}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, OSError) as e:
        logger.error(f"Usage error: {e}")
        print(f"[ERROR] {e}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as e:
        logger.error(str(e))
        print(f"[ERROR] {e}", file=sys.stderr)
        return EXIT_RESOURCE_LIMIT
    except KeyboardInterrupt:
        print("\n[INFO] Operation cancelled by user.", file=sys.stderr)
        return EXIT_RESOURCE_LIMIT
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        print(f"[ERROR] An unexpected error occurred: {e}", file=sys.stderr)
        return EXIT_UNEXPECTED


def main():
    """Main entry point."""
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

import argparse
import logging
import os
import sys

from dotenv import load_dotenv

from mlgc.commands import COMMANDS
from mlgc.errors import MLGCError

logger = logging.getLogger("mlgc")

USAGE_EXIT = 1
INTERNAL_EXIT = 2


class _Parser(argparse.ArgumentParser):
    """Usage errors exit 1 like every other input error."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mlgc", description="Metric-learned graph cut refinement of face detections")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def configure_logging() -> None:
    load_dotenv()
    level = os.getenv("MLGC_LOG_LEVEL", "INFO").upper()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("mlgc")
    root.handlers[:] = [handler]
    root.setLevel(getattr(logging, level, logging.INFO))
    root.propagate = False


# -------------------------------------------------
# Entry point
# -------------------------------------------------
def run(argv=None) -> int:
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        args.handler(args)
    except MLGCError as e:
        print(f"mlgc {args.command}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception("unexpected failure")
        print(f"mlgc {args.command}: internal error: {e}", file=sys.stderr)
        return INTERNAL_EXIT
    return 0


def main() -> None:
    sys.exit(run())

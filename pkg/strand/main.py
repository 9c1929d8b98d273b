"""Command-line entry point: logging setup, dispatch and exit codes."""

import logging
import sys
from typing import Optional, Sequence

from strand.cli.commands import build_parser
from strand.cli.exit_codes import exit_code_for
from strand.config import get_settings
from strand.errors import StrandError

logger = logging.getLogger(__name__)


def configure_logging() -> None:
    cfg = get_settings()
    logging.basicConfig(
        level=getattr(logging, cfg.LOG_LEVEL.upper(), logging.WARNING),
        format="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code.

    Failures print a single ``error: <message>`` line to stderr.
    """
    configure_logging()
    args = build_parser().parse_args(argv)
    logger.debug("running %s", args.command)
    try:
        return args.handler(args)
    except (StrandError, OSError) as exc:
        logger.debug("%s failed: %s", args.command, exc, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)
    except Exception as exc:
        logger.error("Unhandled exception in %s: %s", args.command, exc, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())

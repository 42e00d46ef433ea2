"""Module building the command-line interface."""

import argparse
import logging
import sys
import time
from typing import Optional, Sequence

import sentry_sdk
from pydantic import ValidationError

from app.api.routes import checks, coordination, scenarios
from app.api.routes.schemas import ErrorReport
from app.services.exceptions import CheckerError
from config import get_config

c = get_config()
logging.basicConfig(level=c.LOG_LEVEL)
logger = logging.getLogger(__name__)
logger.setLevel(c.LOG_LEVEL)

if c.SENTRY_DSN and c.STAGE:
    sentry_sdk.init(
        dsn=c.SENTRY_DSN,
        traces_sample_rate=1.0,
        environment=c.STAGE,
    )

EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    """The ckcheck argument parser with every command registered"""
    parser = argparse.ArgumentParser(
        prog="ckcheck",
        description=(
            "Model-check knowledge, common knowledge and coordination "
            "on finite interpreted systems"
        ),
    )
    commands = parser.add_subparsers(dest="command", required=True)
    checks.register(commands)
    coordination.register(commands)
    scenarios.register(commands)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; JSON report on stdout, summary on stderr"""
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        result = args.handler(args)
    except (CheckerError, ValidationError) as exc:
        print(ErrorReport(error=str(exc)).json(indent=c.JSON_INDENT))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        logger.info(
            "%s took %.1f ms", args.command, (time.perf_counter() - started) * 1000
        )

    print(result.report.json(indent=c.JSON_INDENT))
    print(result.summary, file=sys.stderr)
    return result.status


if __name__ == "__main__":
    sys.exit(main())

"""
Entry point of the NP-LDA command line

Exit codes: 0 on success, 2 on library or argument errors, 1 on unexpected
failures. Failures print one JSON line on stderr.
"""
import argparse
import json
import sys
from typing import List, Optional

from rich.console import Console

from app.cli import commands  # noqa: F401
from app.cli.base import command_registry
from app.core.config import get_settings
from app.core.errors import NpLdaError
from app.core.logging import get_logger, setup_logging

logger = get_logger(__name__)


def build_parser(console: Optional[Console] = None) -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(prog="np-lda", description=f"{settings.app_name} command line")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in command_registry.names():
        command = command_registry.create(name, console=console)
        sub = subparsers.add_parser(name, help=command.help, description=command.help)
        command.add_arguments(sub)
        sub.set_defaults(handler=command)
    return parser


def _error_line(code: str, message: str) -> None:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)


def main(argv: Optional[List[str]] = None, console: Optional[Console] = None) -> int:
    setup_logging()
    args = build_parser(console).parse_args(argv)
    try:
        return args.handler.run(args)
    except NpLdaError as exc:
        logger.error("command_failed", command=args.command, error=exc.code, message=exc.message)
        print(json.dumps(exc.to_dict()), file=sys.stderr)
        return 2
    except Exception as exc:
        logger.exception("command_crashed", command=args.command)
        _error_line("internal_error", str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())

# ruff: noqa: E402
import dotenv

dotenv.load_dotenv()

import argparse
import json
import logging
import sys
import typing

from loguru import logger
from pydantic import ValidationError

from commands import (
    check_command,
    continue_command,
    scan_command,
    space_command,
    subspace_command,
)
from config import DEFAULT_SEED, LOG_LEVEL, OUTPUT_DIR, VERSION
from errors import (
    CheckFailed,
    DescriptorError,
    InvalidParameterError,
    LabError,
    check_failed_handler,
    input_error_handler,
    internal_error_handler,
    lab_error_handler,
)
from models import Command, OperatorTag, RunConfig, Suite, pair
from modules.utility import get_env_var, parse_complex, parse_grid

for handler in logging.root.handlers[:]:
    logging.root.removeHandler(handler)


class InterceptHandler(logging.Handler):
    """Route stdlib records, including captured numpy and scipy warnings, into loguru."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        frame, depth = logging.currentframe(), 2
        while frame.f_back and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1

        message = record.getMessage()
        if record.name == "py.warnings":
            # drop the source excerpt that follows the warning line
            message = message.strip().partition("\n")[0]
        logger.opt(depth=depth, exception=record.exc_info).bind(origin=record.name).log(
            level, message
        )


logging.basicConfig(handlers=[InterceptHandler()], level=logging.INFO)
logging.captureWarnings(True)

logger.remove()
logger.add(sys.stderr, level=LOG_LEVEL)
if (log_file := get_env_var("LOG_FILE")) is not None:
    logger.add(log_file, level="DEBUG")


ExceptionHandler = typing.Callable[[typing.Any], int]
exception_handlers: list[tuple[type[BaseException], ExceptionHandler]] = []


def add_exception_handler(exc_class: type[BaseException], handler: ExceptionHandler) -> None:
    """Register a handler; the first registered class matching an error wins."""
    exception_handlers.append((exc_class, handler))


def handle_exception(exc: BaseException) -> int:
    for exc_class, handler in exception_handlers:
        if isinstance(exc, exc_class):
            return handler(exc)
    raise exc


add_exception_handler(CheckFailed, check_failed_handler)
add_exception_handler(ValidationError, input_error_handler)
add_exception_handler(json.JSONDecodeError, input_error_handler)
add_exception_handler(FileNotFoundError, input_error_handler)
add_exception_handler(DescriptorError, input_error_handler)
add_exception_handler(InvalidParameterError, input_error_handler)
add_exception_handler(LabError, lab_error_handler)
add_exception_handler(Exception, internal_error_handler)


COMMANDS = {
    Command.SPACE: space_command,
    Command.CONTINUE: continue_command,
    Command.SCAN: scan_command,
    Command.SUBSPACE: subspace_command,
    Command.CHECK: check_command,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", help="space descriptor JSON (default: scalar Hardy space)")
    common.add_argument("--f", help="function descriptor JSON")
    common.add_argument("--subspace", help="subspace descriptor JSON")
    common.add_argument(
        "--lambda",
        dest="lambdas",
        action="append",
        type=parse_complex,
        default=[],
        help="spectral parameter such as 1.6 or 0.5+0.2j (repeatable)",
    )
    common.add_argument("--grid", type=parse_grid, help="scan grid as center,radius,resolution")
    common.add_argument(
        "--operator",
        type=OperatorTag,
        choices=list(OperatorTag),
        default=OperatorTag.L,
    )
    common.add_argument("--suite", type=Suite, choices=list(Suite), default=Suite.ALL)
    common.add_argument("--out", default=OUTPUT_DIR, help="output directory")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--N", type=int, help="override the truncation length")
    common.add_argument("--tol", type=float, help="override the tolerance")
    common.add_argument("--resolution", type=int, help="override the scan resolution")

    parser = argparse.ArgumentParser(
        prog="cdlab",
        description="Numerical laboratory for left-invertible multiplication operators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in Command:
        subparsers.add_parser(command.value, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            command=Command(args.command),
            space=args.space,
            f=args.f,
            subspace=args.subspace,
            lambdas=[pair(lam) for lam in args.lambdas],
            grid=args.grid,
            operator=args.operator,
            suite=args.suite,
            out=args.out,
            seed=args.seed,
            N=args.N,
            tol=args.tol,
            resolution=args.resolution,
        )
        logger.info(f"Running {config.command.value}")
        status = COMMANDS[config.command](config)
        logger.info(f"Finished {config.command.value}")
        return status
    except Exception as exc:
        return handle_exception(exc)


if __name__ == "__main__":
    sys.exit(main())

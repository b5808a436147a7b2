#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Command line interface for pevade
"""
import logging
import os
import sys
import traceback
from os import makedirs
from pathlib import Path

import argparse
import lazy_import
from appdirs import user_log_dir

from . import __version__
from .command import options
from .constants import (
    APPLICATION_NAME,
    EXIT_USAGE,
    LOG_ENVIRONMENT_VARIABLE
)

factory = lazy_import.lazy_module("pevade.command.factory")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def get_parser() -> argparse.ArgumentParser:
    """
    Get the parser that can be used to process user input

    :return: Argument parser to use for processing the user input
    :rtype: argparse.ArgumentParser
    """
    parser = options.ErrorParser(prog=APPLICATION_NAME,
                                 description="Adversarial robustness toolkit for PE malware detectors.")

    parser.add_argument("-v", "--version", action="version", version=f"{APPLICATION_NAME} {__version__}")
    parser.add_argument("--verbose", action="store_true", help="Turn on debug logging")

    options.add(parser)

    return parser


def configure_logging(verbose: bool = False) -> None:
    """
    Log level from the PEVADE_LOG environment variable, DEBUG with --verbose
    """
    name = os.environ.get(LOG_ENVIRONMENT_VARIABLE, "WARNING").upper()
    level = logging.DEBUG if verbose else getattr(logging, name, None)
    if not isinstance(level, int):
        print(f"Unknown log level {name} in {LOG_ENVIRONMENT_VARIABLE}, using WARNING")
        level = logging.WARNING
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


def execute(args) -> int:
    if not args.command:
        get_parser().print_help()
        return EXIT_USAGE

    return factory.command(args).execute()


def _error_report(exc_info) -> str:
    """
    Create an error report without local variables

    :param exc_info: Exception info tuple from sys.exc_info()
    :return: Report text
    """
    exc_type, exc_value, exc_tb = exc_info

    error_lines = [
        "=" * 70,
        "ERROR REPORT",
        "=" * 70,
        f"\n{APPLICATION_NAME} {__version__}",
        f"Exception Type: {exc_type.__name__}",
        f"Exception Message: {str(exc_value)}",
        "\nStack Trace:",
        "-" * 70
    ]
    error_lines.extend(traceback.format_tb(exc_tb))
    error_lines.append("=" * 70)

    return "\n".join(error_lines)


def main(argv=None) -> int:
    """
    Main method to call when the script is executed on the command line

    :return: 0 if the command executed without issues. Other number indicating and issue
    :rtype: int
    """
    parser = get_parser()

    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    try:
        return execute(args)
    except KeyboardInterrupt:
        return 0
    except Exception:
        print("This is something we haven't foreseen. Please, help us in making the application "
              "better by reporting this issue.")
        traceback.print_exc()
        path = Path(user_log_dir(APPLICATION_NAME, APPLICATION_NAME))
        makedirs(path, exist_ok=True)
        error_file = path.joinpath("error.log")
        try:
            with open(error_file, "w", encoding="utf-8") as log:
                log.write(_error_report(sys.exc_info()))
        except Exception:
            print("Please, copy this error and send it to us, so that we can make the application "
                  "better.")
        else:
            print(f"Error has been also saved into file {error_file}.")

        return -1


if __name__ == "__main__":
    sys.exit(main())

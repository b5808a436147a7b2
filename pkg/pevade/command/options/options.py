# -*- coding: utf-8 -*-
"""
Module for defining command-line argument parsers of the subcommands
"""
import argparse

from ..helper.helper_methods import IntRange
from ...constants import EXIT_USAGE
from ...enums import Command


class ErrorParser(argparse.ArgumentParser):
    """
    Parser to override how argparse is showing messages on error.
    """

    def error(self, message):
        if "the following arguments are required" in message:
            message = self.format_usage() + message

        args = {'message': message.replace("argument command: ", "")}

        self.exit(EXIT_USAGE, "%(message)s\n" % args)


def add(parser):
    subparsers = parser.add_subparsers(dest="command", help="Command options", parser_class=ErrorParser)

    _synth_options(subparsers)
    _train_options(subparsers)
    _attack_options(subparsers)
    _transfer_options(subparsers)
    _inspect_options(subparsers)

    return subparsers


def add_common_options(sub_parser, output: bool = True) -> None:
    sub_parser.add_argument("-c", "--config", type=str, default=None,
                            help="Configuration file with section.key = value lines")
    sub_parser.add_argument("--seed", type=IntRange(0), default=None, help="Seed of every random choice")
    sub_parser.add_argument("--jobs", type=IntRange(1), default=None,
                            help="Number of samples processed in parallel")
    if output:
        sub_parser.add_argument("-o", "--out", type=str, default=None, help="Output directory")


def _synth_options(subparsers):
    sub_parser = subparsers.add_parser(Command.SYNTH.value,
                                       help="Synthesize a corpus of benign and marked malicious PE files")
    add_common_options(sub_parser)
    sub_parser.add_argument("--benign", type=IntRange(1), default=200, help="Number of benign files")
    sub_parser.add_argument("--malicious", type=IntRange(1), default=200, help="Number of malicious files")


def _train_options(subparsers):
    sub_parser = subparsers.add_parser(Command.TRAIN.value, help="Train a detector on the corpus manifest")
    add_common_options(sub_parser)


def _attack_options(subparsers):
    sub_parser = subparsers.add_parser(Command.ATTACK.value,
                                       help="Attack the malicious files and write the campaign CSV")
    add_common_options(sub_parser)


def _transfer_options(subparsers):
    sub_parser = subparsers.add_parser(Command.TRANSFER.value,
                                       help="Count detections of adversarial files by other detectors")
    add_common_options(sub_parser)
    sub_parser.add_argument("adversarial_dir", type=str, help="Directory written by the attack command")
    sub_parser.add_argument("targets", type=str, nargs="+",
                            help="Model file, http(s) URL or cmd:<command line> of every target")


def _inspect_options(subparsers):
    sub_parser = subparsers.add_parser(Command.INSPECT.value,
                                       help="Show the layout of a PE file and its edited ranges")
    sub_parser.add_argument("file", type=str, help="PE file, its .json provenance record is used when present")

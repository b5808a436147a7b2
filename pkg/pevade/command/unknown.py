# -*- coding: utf-8 -*-
"""
Module containing command for Unknown
"""
from argparse import Namespace
from typing import Dict

from .command import Command
from ..constants import EXIT_USAGE


class Unknown(Command):
    """
    Class that should be returned when none of the other are sufficient to
    process the user request

    The command doesn't do anything.
    """
    _name = "unknown"

    def execute(self) -> int:
        print("Command not recognized")

        return EXIT_USAGE

    def _execute(self, config: Dict) -> int:
        return EXIT_USAGE

    @classmethod
    def meets_condition(cls, data: Namespace) -> bool:
        return False

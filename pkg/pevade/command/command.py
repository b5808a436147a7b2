# -*- coding: utf-8 -*-
"""
Module containing abstract class for creating command child classes
"""
import abc
import logging
from argparse import Namespace
from typing import Dict

from .helper import ui
from .helper.corpus import CorpusError
from ..attack import AttackError
from ..config import (
    ConfigError,
    load_configuration
)
from ..constants import (
    EXIT_DATA,
    EXIT_TRANSPORT,
    EXIT_USAGE
)
from ..detector import (
    DetectorError,
    ExternalProtocol,
    ExternalTimeout,
    ExternalUnreachable
)
from ..exceptions import (
    ImageTooLarge,
    TooLarge
)
from ..manipulation import ManipulationError
from ..pe import PeFormatError
from ..validators import ValidationError

logger = logging.getLogger(__name__)


class Command(metaclass=abc.ABCMeta):
    """
    Base class for all commands

    :param Namespace data: Command line arguments
    """

    def __init__(self, data: Namespace):
        self.data = data

    def execute(self) -> int:
        """
        Main execution method of the command.

        Loads the configuration and executes the _execute method.

        :return: 0 if the command executed without issues, 1 for usage or
                 configuration errors, 2 for data errors, 3 when an external
                 detector can't be used
        :rtype: int
        """
        try:
            return self._execute(self.configuration())
        except (ConfigError, ValidationError, ValueError) as error:
            ui.print_error(error)
            return EXIT_USAGE
        except (ExternalTimeout, ExternalProtocol, ExternalUnreachable) as error:
            ui.print_error(f"External detector failed: {error}")
            return EXIT_TRANSPORT
        except (PeFormatError, ManipulationError, AttackError, DetectorError, ImageTooLarge, TooLarge,
                CorpusError, OSError) as error:
            ui.print_error(error)
            return EXIT_DATA

    def configuration(self) -> Dict:
        """
        :return: Configuration file with the command line flags applied
        :rtype: dict
        """
        overrides = {}
        if getattr(self.data, "seed", None) is not None:
            overrides.setdefault("run", {})["seed"] = self.data.seed
        if getattr(self.data, "jobs", None) is not None:
            overrides.setdefault("run", {})["jobs"] = self.data.jobs
        if getattr(self.data, "out", None) is not None:
            overrides.setdefault("output", {})["dir"] = self.data.out
        config = load_configuration(getattr(self.data, "config", None), overrides)
        logger.debug("Configuration: %s", config)

        return config

    @property
    @abc.abstractmethod
    def _name(self):
        pass

    @abc.abstractmethod
    def _execute(self, config: Dict) -> int:
        """
        Method that will be executed in execute method.

        :param dict config: Validated configuration
        :return: Execution status
        """

    @classmethod
    def meets_condition(cls, data: Namespace) -> bool:
        """
        Take responsibility for command line arguments for processing.

        :param Namespace data: Command line arguments given by user

        :return: Whether this class can handle the user request
        :rtype: bool
        """
        return data.command == cls._name

    @classmethod
    def __subclasshook__(cls, c):
        if cls is Command:
            attrs = set(dir(c))

            if set(cls.__abstractmethods__) <= attrs:
                return True

        return NotImplemented

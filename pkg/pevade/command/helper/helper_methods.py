"""
Module providing utility functions shared by the commands
"""
from collections.abc import Mapping
from typing import (
    Dict,
    Optional
)

import argparse


def deep_update(source: Dict, overrides: Mapping) -> Dict:
    """
    Merge overrides into source section by section, modifying source

    :param dict source: Configuration to update
    :param overrides: Values to set, nested mappings are merged key by key
    :return: The updated source
    :rtype: dict
    """
    for key, value in overrides.items():
        if isinstance(value, Mapping) and value:
            source[key] = deep_update(dict(source.get(key) or {}), value)
        else:
            source[key] = value
    return source


class IntRange:
    """
    argparse type accepting integers between optional bounds, both included
    """

    def __init__(self, minimum: Optional[int] = None, maximum: Optional[int] = None):
        self.minimum = minimum
        self.maximum = maximum

    def __call__(self, text: str) -> int:
        try:
            value = int(text)
        except ValueError as error:
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from error
        if self.minimum is not None and value < self.minimum:
            raise argparse.ArgumentTypeError(f"{value} is below the minimum of {self.minimum}")
        if self.maximum is not None and value > self.maximum:
            raise argparse.ArgumentTypeError(f"{value} is above the maximum of {self.maximum}")
        return value

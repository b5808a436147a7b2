# -*- coding: utf-8 -*-
"""
Module for command-line argument parsing and option management.
"""

from .options import (  # noqa: F401
    ErrorParser,
    add
)

__all__ = ["ErrorParser", "add"]

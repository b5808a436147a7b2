# -*- coding: utf-8 -*-
"""
Module for the manipulation appending bytes to the end of the file
"""
from dataclasses import dataclass

from .base import (
    Kind,
    Manipulation,
    Step
)
from .exceptions import BadAlignment
from ..pe.structures import PeFile


@dataclass(frozen=True)
class Padding(Manipulation):
    """
    Append bytes after the overlay, any amount is allowed
    """
    size: int
    kind = Kind.PADDING
    rank = 5

    def transform(self, pe: PeFile, data: bytes) -> Step:
        if self.size < 0:
            raise BadAlignment(f"Padding size can't be negative, got {self.size}")
        if not self.size:
            return Step(bytes(data))

        return Step(bytes(data) + bytes(self.size), ((len(data), self.size),), (len(data), self.size))

# -*- coding: utf-8 -*-
"""
Module for manipulations rewriting the DOS header and stub
"""
from dataclasses import dataclass

from .base import (
    Kind,
    Manipulation,
    Step
)
from ..pe.structures import (
    DOS_HEADER_SIZE,
    E_LFANEW_OFFSET,
    PeFile
)

# first byte after the MZ magic
DOS_FIELDS_START = 2


@dataclass(frozen=True)
class PartialDos(Manipulation):
    """
    Rewrite the DOS header fields between the magic and e_lfanew
    """
    kind = Kind.PARTIAL_DOS
    rank = 4

    def transform(self, pe: PeFile, data: bytes) -> Step:
        return Step(bytes(data), ((DOS_FIELDS_START, E_LFANEW_OFFSET - DOS_FIELDS_START),))


@dataclass(frozen=True)
class FullDos(Manipulation):
    """
    Rewrite the DOS header fields and the whole DOS stub up to the PE signature
    """
    kind = Kind.FULL_DOS
    rank = 4

    def transform(self, pe: PeFile, data: bytes) -> Step:
        editable = [(DOS_FIELDS_START, E_LFANEW_OFFSET - DOS_FIELDS_START)]
        if pe.e_lfanew > DOS_HEADER_SIZE:
            editable.append((DOS_HEADER_SIZE, pe.e_lfanew - DOS_HEADER_SIZE))

        return Step(bytes(data), tuple(editable))

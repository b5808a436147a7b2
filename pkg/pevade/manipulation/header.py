# -*- coding: utf-8 -*-
"""
Module for manipulations growing or rewriting the PE headers
"""
import logging
import struct
from dataclasses import dataclass

from .base import (
    Kind,
    Manipulation,
    Step,
    check_alignment,
    check_header_bytes_free,
    insert,
    move_raw_pointers,
    pack_optional
)
from .exceptions import NoHeaderRoom
from ..pe.structures import (
    COFF_TIME_DATE_STAMP,
    E_LFANEW_OFFSET,
    PeFile
)

logger = logging.getLogger(__name__)

# time_date_stamp, pointer_to_symbol_table and number_of_symbols
COFF_EDITABLE_SIZE = 12

# fields of the optional header the loader doesn't check for user mode executables
OPTIONAL_EDITABLE_FIELDS = (
    ("major_linker_version", 2),
    ("major_image_version", 4),
    ("checksum", 4),
)


@dataclass(frozen=True)
class Extend(Manipulation):
    """
    Move the PE header further into the file by increasing e_lfanew.

    The inserted bytes between the DOS stub and the PE signature are free to
    rewrite. Headers and section contents move by the same amount.
    """
    amount: int
    kind = Kind.EXTEND
    rank = 0

    def transform(self, pe: PeFile, data: bytes) -> Step:
        check_alignment(self.amount, pe, "Extend")
        if not self.amount:
            return Step(bytes(data))

        size_of_headers = pe.optional.size_of_headers + self.amount
        if size_of_headers > pe.lowest_section_rva:
            raise NoHeaderRoom(f"Headers of 0x{size_of_headers:x} bytes would overlap the first section at "
                               f"0x{pe.lowest_section_rva:x}")
        check_header_bytes_free(pe, pe.e_lfanew, pe.optional.size_of_headers)

        start = pe.e_lfanew
        output = insert(data, start, self.amount)
        struct.pack_into("<I", output, E_LFANEW_OFFSET, start + self.amount)
        pack_optional(output, pe, "size_of_headers", size_of_headers, moved=self.amount)
        move_raw_pointers(output, pe, start, self.amount, moved=self.amount)
        logger.debug("Extend moved the PE header from 0x%x to 0x%x", start, start + self.amount)

        return Step(bytes(output), ((start, self.amount),), (start, self.amount))


@dataclass(frozen=True)
class Shift(Manipulation):
    """
    Insert bytes right after the headers, moving the content of every section
    """
    amount: int
    kind = Kind.SHIFT
    rank = 1

    def transform(self, pe: PeFile, data: bytes) -> Step:
        check_alignment(self.amount, pe, "Shift")
        if not self.amount:
            return Step(bytes(data))

        start = pe.optional.size_of_headers
        output = insert(data, start, self.amount)
        move_raw_pointers(output, pe, start, self.amount)

        return Step(bytes(output), ((start, self.amount),), (start, self.amount))


@dataclass(frozen=True)
class HeaderFields(Manipulation):
    """
    Rewrite header fields ignored by the loader: the COFF time stamp and
    symbol table, linker and image versions and the checksum
    """
    kind = Kind.HEADER_FIELDS
    rank = 4

    def transform(self, pe: PeFile, data: bytes) -> Step:
        editable = [(pe.e_lfanew + COFF_TIME_DATE_STAMP, COFF_EDITABLE_SIZE)]
        editable += [(pe.optional_header_offset + pe.optional.field_offset(name), size)
                     for name, size in OPTIONAL_EDITABLE_FIELDS]

        return Step(bytes(data), tuple(editable))

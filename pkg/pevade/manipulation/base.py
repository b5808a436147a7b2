# -*- coding: utf-8 -*-
"""
Module containing the base class for manipulations and the byte level
helpers they share
"""
import abc
import struct
from dataclasses import dataclass
from enum import Enum
from typing import (
    ClassVar,
    Iterable,
    Optional,
    Tuple
)

from .exceptions import (
    BadAlignment,
    NoHeaderRoom
)
from ..pe.structures import (
    COFF_NUMBER_OF_SECTIONS,
    OPTIONAL_FIELDS,
    SECTION_ENTRY_SIZE,
    PeFile
)

IMAGE_DIRECTORY_ENTRY_SECURITY = 4

# file offset of the data behind the security directory, the other directories hold RVAs
_FILE_OFFSET_DIRECTORIES = (IMAGE_DIRECTORY_ENTRY_SECURITY,)


class Kind(Enum):
    EXTEND = "extend"
    SHIFT = "shift"
    SECTION_INJECTION = "section_injection"
    API_INJECTION = "api_injection"
    PARTIAL_DOS = "partial_dos"
    FULL_DOS = "full_dos"
    HEADER_FIELDS = "header_fields"
    SLACK_SPACE = "slack_space"
    PADDING = "padding"


@dataclass(frozen=True)
class Step:
    """
    Outcome of one manipulation applied to a file.

    Offsets are in the coordinates of the manipulated file. ``inserted`` is
    the single block of new bytes, if any: everything at or after its offset
    was moved by its length. ``claimed`` lists bytes the manipulation
    rewrote structurally; they are taken away from editable regions of
    earlier manipulations.
    """
    data: bytes
    editable: Tuple[Tuple[int, int], ...] = ()
    inserted: Optional[Tuple[int, int]] = None
    claimed: Tuple[Tuple[int, int], ...] = ()


class Manipulation(metaclass=abc.ABCMeta):
    """
    Base class for functionality preserving manipulations of PE files
    """
    kind: ClassVar[Kind]
    rank: ClassVar[int]

    @abc.abstractmethod
    def transform(self, pe: PeFile, data: bytes) -> Step:
        """
        Build the manipulated file with zeros in every inserted byte

        :param PeFile pe: Parsed data
        :param bytes data: Content of the file
        :return: Manipulated file and the regions the optimizer may write
        :rtype: Step
        """

    @property
    def tag(self) -> str:
        return self.kind.value.replace("_", "-")

    def __str__(self) -> str:
        return self.kind.value

    @classmethod
    def __subclasshook__(cls, subclass):
        if cls is Manipulation:
            return hasattr(subclass, "transform") and hasattr(subclass, "kind")
        return NotImplemented


def check_alignment(amount: int, pe: PeFile, what: str) -> None:
    if amount < 0 or amount % pe.optional.file_alignment:
        raise BadAlignment(f"{what} amount {amount} is not a multiple of the file alignment "
                           f"{pe.optional.file_alignment}")


def insert(data: bytes, offset: int, length: int) -> bytearray:
    return bytearray(data[:offset]) + bytearray(length) + bytearray(data[offset:])


def pack_optional(output: bytearray, pe: PeFile, name: str, value: int, moved: int = 0) -> None:
    """
    Write an optional header field into the output

    :param bytearray output: Manipulated file
    :param PeFile pe: File before the manipulation
    :param str name: Name of the field
    :param int value: New value
    :param int moved: Number of bytes inserted in front of the optional header
    """
    offset, fmt = OPTIONAL_FIELDS[pe.optional.magic][name]
    struct.pack_into(fmt, output, pe.optional_header_offset + moved + offset, value)


def pack_number_of_sections(output: bytearray, pe: PeFile, value: int) -> None:
    struct.pack_into("<H", output, pe.e_lfanew + COFF_NUMBER_OF_SECTIONS, value)


def pack_directory(output: bytearray, pe: PeFile, index: int, virtual_address: int, size: int,
                   moved: int = 0) -> None:
    struct.pack_into("<II", output, pe.optional_header_offset + moved + pe.optional.data_directory_offset(index),
                     virtual_address, size)


def move_raw_pointers(output: bytearray, pe: PeFile, start: int, amount: int, moved: int = 0) -> None:
    """
    Move every raw pointer at or after start by amount

    :param bytearray output: Manipulated file
    :param PeFile pe: File before the manipulation
    :param int start: File offset in the original file from which pointers move
    :param int amount: Number of bytes inserted at start
    :param int moved: Number of bytes inserted in front of the section table
    """
    for index, section in enumerate(pe.sections):
        entry = section.entry
        if entry.size_of_raw_data and entry.pointer_to_raw_data >= start:
            struct.pack_into("<I", output, pe.section_table_offset + moved + index * SECTION_ENTRY_SIZE + 20,
                             entry.pointer_to_raw_data + amount)
    for index in _FILE_OFFSET_DIRECTORIES:
        directory = pe.optional.directory(index)
        if directory is not None and directory.virtual_address and directory.virtual_address >= start:
            pack_directory(output, pe, index, directory.virtual_address + amount, directory.size, moved)


def referenced_header_ranges(pe: PeFile) -> Iterable[Tuple[int, int]]:
    """
    :param PeFile pe: Parsed file
    :return: (start, end) of header bytes pointed at by data directories
    """
    for index, directory in enumerate(pe.optional.data_directories):
        if index in _FILE_OFFSET_DIRECTORIES or not directory.virtual_address:
            continue
        if directory.virtual_address < pe.optional.size_of_headers:
            yield directory.virtual_address, directory.virtual_address + max(directory.size, 1)


def check_header_bytes_free(pe: PeFile, start: int, end: int) -> None:
    for range_start, range_end in referenced_header_ranges(pe):
        if range_start < end and start < range_end:
            raise NoHeaderRoom(f"Header bytes [0x{range_start:x}, 0x{range_end:x}) are referenced by a data directory")

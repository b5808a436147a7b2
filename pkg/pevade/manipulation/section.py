# -*- coding: utf-8 -*-
"""
Module for manipulations adding sections or writing into unused section space
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import (
    List,
    Tuple
)

from .base import (
    Kind,
    Manipulation,
    Step,
    check_alignment,
    check_header_bytes_free,
    insert,
    move_raw_pointers,
    pack_directory,
    pack_number_of_sections,
    pack_optional
)
from .exceptions import (
    BadAlignment,
    MissingDirectory,
    NoHeaderRoom,
    NoSlack
)
from ..pe.imports import build_import_table
from ..pe.parser import compute_slack_regions
from ..pe.structures import (
    IMAGE_DIRECTORY_ENTRY_IMPORT,
    IMAGE_SCN_CNT_INITIALIZED_DATA,
    IMAGE_SCN_MEM_READ,
    IMAGE_SCN_MEM_WRITE,
    SECTION_ENTRY_SIZE,
    PeFile,
    SectionEntry,
    align_up
)

logger = logging.getLogger(__name__)

DEFAULT_SECTION_NAME = b".adv"
IMPORT_SECTION_NAME = b".idata2"

INJECTED_CHARACTERISTICS = IMAGE_SCN_CNT_INITIALIZED_DATA | IMAGE_SCN_MEM_READ
IMPORT_CHARACTERISTICS = INJECTED_CHARACTERISTICS | IMAGE_SCN_MEM_WRITE


@dataclass(frozen=True)
class _Placement:
    entry_offset: int
    size_of_headers: int
    virtual_address: int
    raw_offset: int


def _place_section(pe: PeFile) -> _Placement:
    entry_offset = pe.section_table_end
    first_raw = pe.first_raw_offset
    if entry_offset + SECTION_ENTRY_SIZE > first_raw:
        raise NoHeaderRoom(f"Only {first_raw - entry_offset} bytes between the section table and the first "
                           f"section content, a section entry needs {SECTION_ENTRY_SIZE}")
    check_header_bytes_free(pe, entry_offset, entry_offset + SECTION_ENTRY_SIZE)

    size_of_headers = max(pe.optional.size_of_headers,
                          align_up(entry_offset + SECTION_ENTRY_SIZE, pe.optional.file_alignment))
    if size_of_headers > first_raw or size_of_headers > pe.lowest_section_rva:
        raise NoHeaderRoom(f"Headers would grow to 0x{size_of_headers:x} bytes, over the first section")

    image_end = max([section.entry.virtual_address + section.entry.mapped_size for section in pe.sections] +
                    [size_of_headers])
    return _Placement(entry_offset, size_of_headers, align_up(image_end, pe.optional.section_alignment),
                      pe.overlay_offset)


def _inject(pe: PeFile, data: bytes, placement: _Placement, name: bytes, content: bytes, virtual_size: int,
            characteristics: int) -> bytearray:
    output = insert(data, placement.raw_offset, len(content))
    output[placement.raw_offset:placement.raw_offset + len(content)] = content
    entry = SectionEntry.create(name, virtual_size, placement.virtual_address, len(content), placement.raw_offset,
                                characteristics)
    output[placement.entry_offset:placement.entry_offset + SECTION_ENTRY_SIZE] = entry.pack()
    pack_number_of_sections(output, pe, len(pe.sections) + 1)
    pack_optional(output, pe, "size_of_headers", placement.size_of_headers)
    pack_optional(output, pe, "size_of_image",
                  align_up(placement.virtual_address + virtual_size, pe.optional.section_alignment))
    move_raw_pointers(output, pe, placement.raw_offset, len(content))

    return output


@dataclass(frozen=True)
class SectionInjection(Manipulation):
    """
    Add a new section whose content is free to rewrite.

    The section entry goes right after the section table, the content in
    front of the overlay. The section is readable initialized data that
    nothing references.
    """
    size: int
    name: bytes = DEFAULT_SECTION_NAME
    kind = Kind.SECTION_INJECTION
    rank = 2

    def transform(self, pe: PeFile, data: bytes) -> Step:
        check_alignment(self.size, pe, "SectionInjection")
        if not self.size:
            raise BadAlignment("An injected section needs at least one file alignment block of content")

        placement = _place_section(pe)
        output = _inject(pe, data, placement, self.name, bytes(self.size), self.size, INJECTED_CHARACTERISTICS)
        logger.debug("Injected section %r of 0x%x bytes at RVA 0x%x", self.name, self.size,
                     placement.virtual_address)

        return Step(bytes(output), ((placement.raw_offset, self.size),), (placement.raw_offset, self.size),
                    ((placement.entry_offset, SECTION_ENTRY_SIZE),))


@dataclass(frozen=True)
class ApiInjection(Manipulation):
    """
    Make the loader import more functions.

    The import directory is rebuilt in a new section: the original
    descriptors are copied verbatim and one descriptor per new DLL follows.
    Nothing calls the new functions.
    """
    entries: Tuple[Tuple[str, str], ...] = ()
    kind = Kind.API_INJECTION
    rank = 3

    def grouped(self) -> List[Tuple[str, Tuple[str, ...]]]:
        """
        :return: Functions to import grouped by DLL, in order of first appearance
        :rtype: List[Tuple[str, Tuple[str, ...]]]
        """
        groups: "OrderedDict[str, List[str]]" = OrderedDict()
        for dll_name, function in self.entries:
            functions = groups.setdefault(dll_name, [])
            if function not in functions:
                functions.append(function)
        return [(dll_name, tuple(functions)) for dll_name, functions in groups.items()]

    def transform(self, pe: PeFile, data: bytes) -> Step:
        if pe.optional.directory(IMAGE_DIRECTORY_ENTRY_IMPORT) is None:
            raise MissingDirectory("The optional header has less than 2 data directories")

        placement = _place_section(pe)
        table, descriptors_size = build_import_table(
            placement.virtual_address, self.grouped(), 8 if pe.optional.is_pe32_plus else 4,
            [descriptor.raw for descriptor in pe.imports.descriptors])
        content = table.ljust(align_up(len(table), pe.optional.file_alignment), b"\0")

        output = _inject(pe, data, placement, IMPORT_SECTION_NAME, content, len(table), IMPORT_CHARACTERISTICS)
        pack_directory(output, pe, IMAGE_DIRECTORY_ENTRY_IMPORT, placement.virtual_address, descriptors_size)
        logger.debug("Rebuilt import directory with %d new entries at RVA 0x%x", len(self.entries),
                     placement.virtual_address)

        return Step(bytes(output), (), (placement.raw_offset, len(content)),
                    ((placement.entry_offset, SECTION_ENTRY_SIZE),))


@dataclass(frozen=True)
class SlackSpace(Manipulation):
    """
    Rewrite file bytes the loader never maps
    """
    kind = Kind.SLACK_SPACE
    rank = 4

    def transform(self, pe: PeFile, data: bytes) -> Step:
        regions = compute_slack_regions(pe)
        if not regions:
            raise NoSlack("The file has no slack space")

        return Step(bytes(data), tuple(regions))

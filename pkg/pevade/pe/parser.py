# -*- coding: utf-8 -*-
"""
Module for parsing PE files into a lossless structure and writing them back
"""
import logging
import struct
from typing import (
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple
)

from . import exceptions
from .structures import (
    COFF_HEADER_SIZE,
    DATA_DIRECTORIES_OFFSET,
    DOS_HEADER_SIZE,
    DOS_MAGIC,
    E_LFANEW_OFFSET,
    IMAGE_DIRECTORY_ENTRY_IMPORT,
    IMPORT_DESCRIPTOR_SIZE,
    OPTIONAL_FIELDS,
    PE_SIGNATURE,
    SECTION_ENTRY_SIZE,
    CoffHeader,
    DosHeader,
    ImportDescriptor,
    ImportDirectory,
    OptionalHeader,
    PeFile,
    Region,
    Section,
    SectionEntry,
    align_up,
    is_power_of_two
)

logger = logging.getLogger(__name__)

MIN_FILE_ALIGNMENT = 512
MAX_FILE_ALIGNMENT = 65536

_MAX_DESCRIPTORS = 4096
_MAX_THUNKS = 65536
_MAX_NAME_LENGTH = 4096


def parse(data: bytes) -> PeFile:
    """
    Parse the given bytes into a PeFile

    :param bytes data: Content of a PE file
    :return: Structure that serializes back to exactly the given bytes
    :rtype: PeFile
    :raise PeFormatError: The file is not a PE file accepted by the toolkit
    """
    data = bytes(data)
    length = len(data)
    if length < DOS_HEADER_SIZE:
        raise exceptions.Truncated("File is shorter than the DOS header", length)
    if data[:2] != DOS_MAGIC:
        raise exceptions.BadMagic(f"Expected MZ magic, found {data[:2]!r}", 0)

    e_lfanew = struct.unpack_from("<I", data, E_LFANEW_OFFSET)[0]
    if e_lfanew < DOS_HEADER_SIZE or e_lfanew + 4 > length:
        raise exceptions.BadPeOffset(f"PE header offset 0x{e_lfanew:x} is outside of the file", E_LFANEW_OFFSET)
    if data[e_lfanew:e_lfanew + 4] != PE_SIGNATURE:
        raise exceptions.BadSignature("PE signature not found", e_lfanew)
    if e_lfanew + COFF_HEADER_SIZE > length:
        raise exceptions.Truncated("COFF header goes past the end of the file", e_lfanew)

    dos = DosHeader(data[:2], data[2:E_LFANEW_OFFSET], e_lfanew, data[DOS_HEADER_SIZE:e_lfanew])
    coff = CoffHeader.unpack(data[e_lfanew:e_lfanew + COFF_HEADER_SIZE])

    optional_offset = e_lfanew + COFF_HEADER_SIZE
    optional_end = optional_offset + coff.size_of_optional_header
    if optional_end > length:
        raise exceptions.Truncated("Optional header goes past the end of the file", optional_offset)
    if coff.size_of_optional_header < 2:
        raise exceptions.Malformed("Optional header is missing", optional_offset)
    magic = struct.unpack_from("<H", data, optional_offset)[0]
    if magic not in OPTIONAL_FIELDS:
        raise exceptions.Malformed(f"Unknown optional header magic 0x{magic:x}", optional_offset)
    if coff.size_of_optional_header < DATA_DIRECTORIES_OFFSET[magic]:
        raise exceptions.Malformed("Optional header is too small for its magic", optional_offset)
    optional = OptionalHeader.unpack(data[optional_offset:optional_end])

    table_end = optional_end + SECTION_ENTRY_SIZE * coff.number_of_sections
    if table_end > length:
        raise exceptions.Truncated("Section table goes past the end of the file", optional_end)

    sections = []
    for index in range(coff.number_of_sections):
        start = optional_end + index * SECTION_ENTRY_SIZE
        entry = SectionEntry.unpack(data[start:start + SECTION_ENTRY_SIZE])
        if entry.size_of_raw_data and entry.raw_end > length:
            raise exceptions.Truncated(f"Raw data of section {entry.display_name!r} goes past the end of the file",
                                       entry.pointer_to_raw_data)
        content = data[entry.pointer_to_raw_data:entry.raw_end] if entry.size_of_raw_data else b""
        sections.append(Section(entry, content))

    pe = PeFile(dos=dos, coff=coff, optional=optional, sections=tuple(sections), overlay=b"", raw_length=length)
    _raise_first(_layout_problems(pe, length), {"truncated": exceptions.Truncated,
                                                 "malformed": exceptions.Malformed})

    overlay_offset = pe.overlay_offset
    gaps = tuple((offset, data[offset:offset + size])
                 for offset, size in _unowned(pe.section_table_end, overlay_offset, pe.sections))
    pe = PeFile(dos=dos, coff=coff, optional=optional, sections=tuple(sections), overlay=data[overlay_offset:],
                raw_length=length, gaps=gaps)

    imports = parse_imports(pe, data)
    logger.debug("Parsed PE with %d sections, %d import descriptors, %d overlay bytes",
                 len(sections), len(imports.descriptors), len(pe.overlay))

    return PeFile(dos=dos, coff=coff, optional=optional, sections=pe.sections, overlay=pe.overlay,
                  raw_length=length, gaps=gaps, imports=imports)


def serialize(pe: PeFile) -> bytes:
    """
    Write the PeFile back into bytes

    :param PeFile pe: Structure to write
    :return: Content of the PE file
    :rtype: bytes
    :raise InvariantViolation: The structure breaks one of the layout rules
    """
    if pe.coff.number_of_sections != len(pe.sections):
        raise exceptions.InvariantViolation(
            f"number_of_sections is {pe.coff.number_of_sections}, section table has {len(pe.sections)}",
            pe.e_lfanew + 6)
    if pe.dos.magic != DOS_MAGIC:
        raise exceptions.InvariantViolation("MZ magic is missing", 0)
    if len(pe.dos.stub_fields) != E_LFANEW_OFFSET - 2 or \
            DOS_HEADER_SIZE + len(pe.dos.extended_stub) != pe.e_lfanew:
        raise exceptions.InvariantViolation("DOS header doesn't end at e_lfanew", E_LFANEW_OFFSET)
    if len(pe.optional.raw) != pe.coff.size_of_optional_header:
        raise exceptions.InvariantViolation("Optional header size doesn't match the COFF header", pe.e_lfanew + 20)
    for section in pe.sections:
        if len(section.content) != section.entry.size_of_raw_data:
            raise exceptions.InvariantViolation(
                f"Content of section {section.entry.display_name!r} doesn't match size_of_raw_data",
                section.entry.pointer_to_raw_data)

    length = pe.overlay_offset + len(pe.overlay)
    if length != pe.raw_length:
        raise exceptions.InvariantViolation(f"raw_length {pe.raw_length} doesn't match the layout length {length}")
    _raise_first(_layout_problems(pe, length), {"truncated": exceptions.InvariantViolation,
                                                 "malformed": exceptions.InvariantViolation})

    output = bytearray(length)
    output[:pe.e_lfanew] = pe.dos.pack()
    output[pe.e_lfanew:pe.optional_header_offset] = pe.coff.pack()
    output[pe.optional_header_offset:pe.section_table_offset] = pe.optional.pack()
    for index, section in enumerate(pe.sections):
        start = pe.section_table_offset + index * SECTION_ENTRY_SIZE
        output[start:start + SECTION_ENTRY_SIZE] = section.entry.pack()

    expected_gaps = list(_unowned(pe.section_table_end, pe.overlay_offset, pe.sections))
    if [(offset, len(content)) for offset, content in pe.gaps] != expected_gaps:
        raise exceptions.InvariantViolation("Gap bytes don't cover the unowned part of the file")
    for offset, content in pe.gaps:
        output[offset:offset + len(content)] = content
    for section in pe.sections:
        if section.entry.size_of_raw_data:
            output[section.entry.pointer_to_raw_data:section.entry.raw_end] = section.content
    output[pe.overlay_offset:] = pe.overlay

    return bytes(output)


def region_map(pe: PeFile) -> Tuple[Region, ...]:
    """
    Partition of the file into the regions owning each byte

    :param PeFile pe: Parsed file
    :return: Regions sorted by offset, covering the whole file exactly once
    :rtype: Tuple[Region, ...]
    """
    regions = [Region("dos_header", 0, DOS_HEADER_SIZE)]
    if pe.e_lfanew > DOS_HEADER_SIZE:
        regions.append(Region("dos_stub", DOS_HEADER_SIZE, pe.e_lfanew - DOS_HEADER_SIZE))
    regions.append(Region("nt_headers", pe.e_lfanew, pe.section_table_end - pe.e_lfanew))
    for offset, content in pe.gaps:
        label = "header padding" if offset < pe.optional.size_of_headers else ""
        regions.append(Region("gap", offset, len(content), label))
    for section in pe.sections:
        if section.entry.size_of_raw_data:
            regions.append(Region("section", section.entry.pointer_to_raw_data, section.entry.size_of_raw_data,
                                  section.entry.display_name))
    if pe.overlay:
        regions.append(Region("overlay", pe.overlay_offset, len(pe.overlay)))

    return tuple(sorted(regions, key=lambda region: region.offset))


def compute_slack_regions(pe: PeFile) -> List[Tuple[int, int]]:
    """
    Find file bytes the loader never maps: the raw tail of sections past their
    virtual size, the space between headers and the first section, and gaps
    between section contents.

    :param PeFile pe: Parsed file
    :return: Sorted, disjoint (file offset, length) pairs
    :rtype: List[Tuple[int, int]]
    """
    regions = []
    for offset, content in pe.gaps:
        start = max(offset, pe.optional.size_of_headers)
        end = offset + len(content)
        if start < end:
            regions.append((start, end - start))
    for section in pe.sections:
        entry = section.entry
        if entry.size_of_raw_data and entry.mapped_size < entry.size_of_raw_data:
            regions.append((entry.pointer_to_raw_data + entry.mapped_size,
                            entry.size_of_raw_data - entry.mapped_size))

    merged: List[Tuple[int, int]] = []
    for offset, size in sorted(regions):
        if merged and merged[-1][0] + merged[-1][1] == offset:
            merged[-1] = (merged[-1][0], merged[-1][1] + size)
        else:
            merged.append((offset, size))

    return merged


def rva_to_offset(pe: PeFile, rva: int) -> Optional[int]:
    """
    Translate a relative virtual address into a file offset

    :param PeFile pe: Parsed file
    :param int rva: Address relative to the image base
    :return: File offset backing the address or None if the address is not backed by file content
    :rtype: Optional[int]
    """
    if rva < pe.optional.size_of_headers:
        return rva
    section = pe.section_for_rva(rva)
    if section is None:
        return None
    delta = rva - section.entry.virtual_address
    if delta >= section.entry.size_of_raw_data:
        return None

    return section.entry.pointer_to_raw_data + delta


def parse_imports(pe: PeFile, data: bytes) -> ImportDirectory:
    """
    Decode the import directory

    :param PeFile pe: Parsed file
    :param bytes data: Content of the file
    :return: Import descriptors, empty when the file has no import directory
    :rtype: ImportDirectory
    :raise Malformed: A descriptor or name lies outside of the mapped sections
    """
    directory = pe.optional.directory(IMAGE_DIRECTORY_ENTRY_IMPORT)
    if directory is None or directory.virtual_address == 0:
        return ImportDirectory()

    thunk_size = 8 if pe.optional.is_pe32_plus else 4
    ordinal_flag = 1 << (thunk_size * 8 - 1)
    descriptors = []
    for index in range(_MAX_DESCRIPTORS):
        rva = directory.virtual_address + index * IMPORT_DESCRIPTOR_SIZE
        raw = _read_mapped(pe, data, rva, IMPORT_DESCRIPTOR_SIZE, "import descriptor")
        original_first_thunk, _, _, name_rva, first_thunk = struct.unpack("<IIIII", raw)
        if raw == bytes(IMPORT_DESCRIPTOR_SIZE):
            break

        dll_name = _read_string(pe, data, name_rva)
        functions = []
        thunk_rva = original_first_thunk or first_thunk
        for thunk_index in range(_MAX_THUNKS):
            value = int.from_bytes(_read_mapped(pe, data, thunk_rva + thunk_index * thunk_size, thunk_size,
                                                "import thunk"), "little")
            if value == 0:
                break
            if value & ordinal_flag:
                functions.append(f"#{value & 0xffff}")
            else:
                functions.append(_read_string(pe, data, (value & 0x7fffffff) + 2))
        descriptors.append(ImportDescriptor(dll_name, tuple(functions),
                                            (original_first_thunk, name_rva, first_thunk), raw))

    return ImportDirectory(tuple(descriptors), directory.virtual_address)


def _read_mapped(pe: PeFile, data: bytes, rva: int, size: int, what: str) -> bytes:
    offset = rva_to_offset(pe, rva)
    section = pe.section_for_rva(rva)
    if offset is None or section is None or rva + size > section.entry.virtual_address + \
            min(section.entry.mapped_size, section.entry.size_of_raw_data):
        raise exceptions.Malformed(f"The {what} at RVA 0x{rva:x} is not inside a mapped section", offset)

    return data[offset:offset + size]


def _read_string(pe: PeFile, data: bytes, rva: int) -> str:
    offset = rva_to_offset(pe, rva)
    section = pe.section_for_rva(rva)
    if offset is None or section is None:
        raise exceptions.Malformed(f"Import name at RVA 0x{rva:x} is not inside a mapped section", offset)
    limit = section.entry.pointer_to_raw_data + min(section.entry.mapped_size, section.entry.size_of_raw_data)
    end = data.find(b"\0", offset, min(limit, offset + _MAX_NAME_LENGTH))
    if end < 0:
        raise exceptions.Malformed(f"Import name at RVA 0x{rva:x} is not terminated inside its section", offset)

    return data[offset:end].decode("latin-1")


def _unowned(start: int, end: int, sections: Sequence[Section]) -> Iterator[Tuple[int, int]]:
    ranges = sorted((section.entry.pointer_to_raw_data, section.entry.raw_end) for section in sections
                    if section.entry.size_of_raw_data)
    cursor = start
    for range_start, range_end in ranges:
        if range_start > cursor:
            yield cursor, range_start - cursor
        cursor = max(cursor, range_end)
    if end > cursor:
        yield cursor, end - cursor


def _layout_problems(pe: PeFile, length: int) -> Iterator[Tuple[str, str, int]]:
    optional = pe.optional
    optional_offset = pe.optional_header_offset
    file_alignment = optional.file_alignment
    section_alignment = optional.section_alignment

    if pe.e_lfanew < DOS_HEADER_SIZE or pe.e_lfanew + 4 > length:
        yield "malformed", "e_lfanew is out of range", E_LFANEW_OFFSET
    if not (is_power_of_two(file_alignment) and MIN_FILE_ALIGNMENT <= file_alignment <= MAX_FILE_ALIGNMENT):
        yield "malformed", f"file_alignment 0x{file_alignment:x} is invalid", \
            optional_offset + optional.field_offset("file_alignment")
        return
    if not is_power_of_two(section_alignment) or section_alignment < file_alignment:
        yield "malformed", f"section_alignment 0x{section_alignment:x} is invalid", \
            optional_offset + optional.field_offset("section_alignment")
        return
    size_of_headers_offset = optional_offset + optional.field_offset("size_of_headers")
    if optional.size_of_headers % file_alignment or optional.size_of_headers < pe.section_table_end:
        yield "malformed", f"size_of_headers 0x{optional.size_of_headers:x} is invalid", size_of_headers_offset
    if optional.size_of_headers > length:
        yield "truncated", "Headers go past the end of the file", size_of_headers_offset

    raw_ranges = []
    virtual_ranges = []
    for index, section in enumerate(pe.sections):
        entry = section.entry
        entry_offset = pe.section_table_offset + index * SECTION_ENTRY_SIZE
        name = entry.display_name
        if entry.virtual_address % section_alignment:
            yield "malformed", f"Section {name!r} virtual address is not aligned", entry_offset + 12
        if entry.virtual_address < optional.size_of_headers:
            yield "malformed", f"Section {name!r} is mapped over the headers", entry_offset + 12
        if entry.size_of_raw_data % file_alignment or entry.pointer_to_raw_data % file_alignment:
            yield "malformed", f"Section {name!r} raw data is not aligned", entry_offset + 16
        if entry.size_of_raw_data:
            if entry.raw_end > length:
                yield "truncated", f"Raw data of section {name!r} goes past the end of the file", \
                    entry.pointer_to_raw_data
            if entry.pointer_to_raw_data < optional.size_of_headers:
                yield "malformed", f"Raw data of section {name!r} starts inside the headers", entry_offset + 20
            raw_ranges.append((entry.pointer_to_raw_data, entry.raw_end, name))
        virtual_ranges.append((entry.virtual_address, entry.virtual_address + entry.mapped_size, name))

    for ranges, what in ((raw_ranges, "raw"), (virtual_ranges, "virtual")):
        ranges = sorted(ranges)
        for (_, previous_end, previous), (start, _, name) in zip(ranges, ranges[1:]):
            if start < previous_end:
                yield "malformed", f"Section {name!r} {what} range overlaps section {previous!r}", start

    image_end = max([end for _, end, _ in virtual_ranges] + [optional.size_of_headers])
    if optional.size_of_image % section_alignment or optional.size_of_image < align_up(image_end, section_alignment):
        yield "malformed", f"size_of_image 0x{optional.size_of_image:x} is invalid", \
            optional_offset + optional.field_offset("size_of_image")


def _raise_first(problems: Iterator[Tuple[str, str, int]], error_types) -> None:
    for kind, message, offset in problems:
        raise error_types[kind](message, offset)

# -*- coding: utf-8 -*-
"""
Module for synthesizing minimal valid PE files
"""
import logging
import struct
from dataclasses import dataclass
from typing import (
    List,
    Sequence,
    Tuple
)

import numpy as np

from . import exceptions
from .imports import build_import_table
from .structures import (
    COFF_HEADER_SIZE,
    DATA_DIRECTORIES_OFFSET,
    DATA_DIRECTORY_SIZE,
    E_LFANEW_OFFSET,
    IMAGE_DIRECTORY_ENTRY_IMPORT,
    IMAGE_FILE_MACHINE_AMD64,
    IMAGE_FILE_MACHINE_I386,
    IMAGE_SCN_CNT_CODE,
    IMAGE_SCN_CNT_INITIALIZED_DATA,
    IMAGE_SCN_MEM_EXECUTE,
    IMAGE_SCN_MEM_READ,
    IMAGE_SCN_MEM_WRITE,
    OPTIONAL_FIELDS,
    PE32_MAGIC,
    PE32_PLUS_MAGIC,
    PE_SIGNATURE,
    SECTION_ENTRY_SIZE,
    align_up,
    is_power_of_two
)

logger = logging.getLogger(__name__)

E_LFANEW = 0x80
NUMBER_OF_DATA_DIRECTORIES = 16
MAX_SECTIONS = 16

_DOS_FIELDS = (0x90, 3, 0, 4, 0, 0xffff, 0, 0xb8, 0, 0, 0, 0x40, 0)
_DOS_STUB = (b"\x0e\x1f\xba\x0e\x00\xb4\x09\xcd\x21\xb8\x01\x4c\xcd\x21"
             b"This program cannot be run in DOS mode.\r\r\n$")
_SECTION_NAMES = (b".text", b".rdata", b".data", b".pdata", b".rsrc", b".reloc")

_CODE = IMAGE_SCN_CNT_CODE | IMAGE_SCN_MEM_EXECUTE | IMAGE_SCN_MEM_READ
_DATA = IMAGE_SCN_CNT_INITIALIZED_DATA | IMAGE_SCN_MEM_READ
_IMPORTS = IMAGE_SCN_CNT_INITIALIZED_DATA | IMAGE_SCN_MEM_READ | IMAGE_SCN_MEM_WRITE


@dataclass(frozen=True)
class SynthSpec:
    """
    Layout of a synthesized PE file

    ``header_reserve`` leaves virtual room between the headers and the first
    section so that the headers can grow. ``first_section_prefix`` is copied
    to a seeded offset inside the first section.
    """
    n_sections: int = 1
    file_alignment: int = 512
    section_alignment: int = 4096
    overlay_len: int = 0
    content_seed: int = 0
    pe32_plus: bool = False
    packed: bool = False
    header_reserve: int = 0
    imports: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()
    first_section_prefix: bytes = b""


def synthesize_minimal(spec: SynthSpec) -> bytes:
    """
    Build a PE file following the given layout

    :param SynthSpec spec: Layout of the file
    :return: Content of a PE file accepted by parse, the same for the same spec
    :rtype: bytes
    :raise SpecInfeasible: The layout can't be built
    """
    _check(spec)
    rng = np.random.default_rng(spec.content_seed)
    magic = PE32_PLUS_MAGIC if spec.pe32_plus else PE32_MAGIC
    size_of_optional_header = DATA_DIRECTORIES_OFFSET[magic] + NUMBER_OF_DATA_DIRECTORIES * DATA_DIRECTORY_SIZE
    table_offset = E_LFANEW + COFF_HEADER_SIZE + size_of_optional_header
    size_of_headers = align_up(table_offset + SECTION_ENTRY_SIZE * spec.n_sections, spec.file_alignment)

    virtual_address = align_up(size_of_headers + spec.header_reserve, spec.section_alignment)

    entries: List[Tuple[bytes, int, int, int, int, int]] = []
    contents: List[bytes] = []
    pointer = size_of_headers
    import_directory = (0, 0)
    for index in range(spec.n_sections):
        has_imports = bool(spec.imports) and index == spec.n_sections - 1
        if has_imports:
            body, descriptors_size = build_import_table(virtual_address, spec.imports, 8 if spec.pe32_plus else 4)
            import_directory = (virtual_address, descriptors_size)
            name, characteristics = b".idata", _IMPORTS
        else:
            body = rng.integers(0, 256, size=int(rng.integers(64, 2 * spec.file_alignment)), dtype=np.uint8).tobytes()
            if index == 0:
                body = _with_prefix(body, spec.first_section_prefix, rng)
            name = _SECTION_NAMES[index] if index < len(_SECTION_NAMES) else f".sec{index}".encode()
            characteristics = _CODE if index == 0 else _DATA

        size_of_raw_data = align_up(len(body), spec.file_alignment)
        virtual_size = size_of_raw_data if spec.packed else len(body)
        contents.append(body.ljust(size_of_raw_data, b"\0") if not spec.packed else
                        body + rng.integers(0, 256, size=size_of_raw_data - len(body), dtype=np.uint8).tobytes())
        entries.append((name, virtual_size, virtual_address, size_of_raw_data, pointer, characteristics))
        pointer += size_of_raw_data
        virtual_address = align_up(virtual_address + virtual_size, spec.section_alignment)

    first_name, first_virtual_size, first_rva = entries[0][:3]
    entry_rva = first_rva + int(rng.integers(0, min(first_virtual_size, 256)))
    time_date_stamp = 0x40000000 + int(rng.integers(0, 1 << 28))
    overlay = rng.integers(0, 256, size=spec.overlay_len, dtype=np.uint8).tobytes()

    output = bytearray(size_of_headers)
    output[:2] = b"MZ"
    struct.pack_into("<13H", output, 2, *_DOS_FIELDS)
    struct.pack_into("<I", output, E_LFANEW_OFFSET, E_LFANEW)
    output[0x40:0x40 + len(_DOS_STUB)] = _DOS_STUB

    machine = IMAGE_FILE_MACHINE_AMD64 if spec.pe32_plus else IMAGE_FILE_MACHINE_I386
    characteristics = 0x0022 if spec.pe32_plus else 0x0102
    output[E_LFANEW:E_LFANEW + COFF_HEADER_SIZE] = struct.pack(
        "<4sHHIIIHH", PE_SIGNATURE, machine, spec.n_sections, time_date_stamp, 0, 0, size_of_optional_header,
        characteristics)

    optional = _optional_header(spec, magic, size_of_optional_header, entries, entry_rva, size_of_headers,
                                virtual_address, import_directory)
    output[E_LFANEW + COFF_HEADER_SIZE:table_offset] = optional
    for index, (name, virtual_size, rva, size_of_raw_data, pointer_to_raw_data, flags) in enumerate(entries):
        struct.pack_into("<8sIIIIIIHHI", output, table_offset + index * SECTION_ENTRY_SIZE, name, virtual_size,
                         rva, size_of_raw_data, pointer_to_raw_data, 0, 0, 0, 0, flags)

    logger.debug("Synthesized PE: %d sections, %d bytes of headers, first section %s at 0x%x",
                 spec.n_sections, size_of_headers, first_name.decode(), first_rva)

    return bytes(output) + b"".join(contents) + overlay


def _check(spec: SynthSpec) -> None:
    if not 1 <= spec.n_sections <= MAX_SECTIONS:
        raise exceptions.SpecInfeasible(f"Number of sections must be in [1, {MAX_SECTIONS}], got {spec.n_sections}")
    if not is_power_of_two(spec.file_alignment) or not 512 <= spec.file_alignment <= 65536:
        raise exceptions.SpecInfeasible(f"Invalid file alignment {spec.file_alignment}")
    if not is_power_of_two(spec.section_alignment) or spec.section_alignment < spec.file_alignment:
        raise exceptions.SpecInfeasible(f"Invalid section alignment {spec.section_alignment}")
    if spec.overlay_len < 0 or spec.header_reserve < 0:
        raise exceptions.SpecInfeasible("Overlay length and header reserve can't be negative")
    if spec.imports and spec.n_sections < 2:
        raise exceptions.SpecInfeasible("Imports need a section of their own next to the code section")
    if len(spec.first_section_prefix) > spec.file_alignment:
        raise exceptions.SpecInfeasible("First section prefix is longer than the file alignment")


def _with_prefix(body: bytes, prefix: bytes, rng: np.random.Generator) -> bytes:
    if not prefix:
        return body
    if len(body) < len(prefix):
        body = body + bytes(len(prefix) - len(body))
    offset = int(rng.integers(0, len(body) - len(prefix) + 1))

    return body[:offset] + prefix + body[offset + len(prefix):]


def _optional_header(spec: SynthSpec, magic: int, size: int, entries: Sequence[tuple], entry_rva: int,
                     size_of_headers: int, size_of_image: int, import_directory: Tuple[int, int]) -> bytes:
    raw = bytearray(size)
    values = {
        "magic": magic,
        "major_linker_version": 14,
        "minor_linker_version": 0,
        "size_of_code": entries[0][3],
        "address_of_entry_point": entry_rva,
        "image_base": 0x140000000 if spec.pe32_plus else 0x400000,
        "section_alignment": spec.section_alignment,
        "file_alignment": spec.file_alignment,
        "major_image_version": 0,
        "minor_image_version": 0,
        "size_of_image": size_of_image,
        "size_of_headers": size_of_headers,
        "checksum": 0,
        "subsystem": 3,
        "dll_characteristics": 0x8140,
        "number_of_rva_and_sizes": NUMBER_OF_DATA_DIRECTORIES,
    }
    for name, (offset, fmt) in OPTIONAL_FIELDS[magic].items():
        struct.pack_into(fmt, raw, offset, values[name])

    # base of code, OS and subsystem versions
    struct.pack_into("<I", raw, 20, entries[0][2])
    struct.pack_into("<HH", raw, 40, 6, 0)
    struct.pack_into("<HH", raw, 48, 6, 0)
    if spec.pe32_plus:
        struct.pack_into("<QQQQ", raw, 72, 0x100000, 0x1000, 0x100000, 0x1000)
    else:
        struct.pack_into("<IIII", raw, 72, 0x100000, 0x1000, 0x100000, 0x1000)

    if import_directory[0]:
        offset = DATA_DIRECTORIES_OFFSET[magic] + IMAGE_DIRECTORY_ENTRY_IMPORT * DATA_DIRECTORY_SIZE
        struct.pack_into("<II", raw, offset, *import_directory)

    return bytes(raw)

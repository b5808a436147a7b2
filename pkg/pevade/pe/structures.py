# -*- coding: utf-8 -*-
"""
Data types describing a parsed PE file.

Every header keeps the bytes it was read from. Known fields are patched back
into those bytes on serialization, so reserved and unknown fields survive a
round trip untouched.
"""
import struct
from dataclasses import dataclass, field
from typing import (
    Dict,
    Optional,
    Tuple
)

DOS_MAGIC = b"MZ"
PE_SIGNATURE = b"PE\0\0"
E_LFANEW_OFFSET = 0x3c
DOS_HEADER_SIZE = 0x40

COFF_HEADER_SIZE = 24  # signature included
SECTION_ENTRY_SIZE = 40
DATA_DIRECTORY_SIZE = 8
IMPORT_DESCRIPTOR_SIZE = 20

PE32_MAGIC = 0x10b
PE32_PLUS_MAGIC = 0x20b

IMAGE_DIRECTORY_ENTRY_IMPORT = 1
IMAGE_DIRECTORY_ENTRY_IAT = 12

IMAGE_FILE_MACHINE_I386 = 0x014c
IMAGE_FILE_MACHINE_AMD64 = 0x8664

IMAGE_SCN_CNT_CODE = 0x00000020
IMAGE_SCN_CNT_INITIALIZED_DATA = 0x00000040
IMAGE_SCN_MEM_EXECUTE = 0x20000000
IMAGE_SCN_MEM_READ = 0x40000000
IMAGE_SCN_MEM_WRITE = 0x80000000

_COFF_FORMAT = "<4sHHIIIHH"
_SECTION_FORMAT = "<8sIIII"

# offset, struct format
_OPTIONAL_FIELDS_COMMON: Dict[str, Tuple[int, str]] = {
    "magic": (0, "<H"),
    "major_linker_version": (2, "<B"),
    "minor_linker_version": (3, "<B"),
    "size_of_code": (4, "<I"),
    "address_of_entry_point": (16, "<I"),
    "section_alignment": (32, "<I"),
    "file_alignment": (36, "<I"),
    "major_image_version": (44, "<H"),
    "minor_image_version": (46, "<H"),
    "size_of_image": (56, "<I"),
    "size_of_headers": (60, "<I"),
    "checksum": (64, "<I"),
    "subsystem": (68, "<H"),
    "dll_characteristics": (70, "<H"),
}

OPTIONAL_FIELDS: Dict[int, Dict[str, Tuple[int, str]]] = {
    PE32_MAGIC: {
        **_OPTIONAL_FIELDS_COMMON,
        "image_base": (28, "<I"),
        "number_of_rva_and_sizes": (92, "<I"),
    },
    PE32_PLUS_MAGIC: {
        **_OPTIONAL_FIELDS_COMMON,
        "image_base": (24, "<Q"),
        "number_of_rva_and_sizes": (108, "<I"),
    },
}

DATA_DIRECTORIES_OFFSET = {
    PE32_MAGIC: 96,
    PE32_PLUS_MAGIC: 112,
}

# COFF header fields relative to the PE signature
COFF_TIME_DATE_STAMP = 8
COFF_NUMBER_OF_SECTIONS = 6


def align_up(value: int, alignment: int) -> int:
    """
    Round value up to the next multiple of alignment

    :param int value: Value to round
    :param int alignment: Alignment, must be positive
    :return: Smallest multiple of alignment not lower than value
    :rtype: int
    """
    return (value + alignment - 1) // alignment * alignment


def is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


@dataclass(frozen=True)
class DosHeader:
    magic: bytes
    stub_fields: bytes
    e_lfanew: int
    extended_stub: bytes

    def pack(self) -> bytes:
        return self.magic + self.stub_fields + struct.pack("<I", self.e_lfanew) + self.extended_stub


@dataclass(frozen=True)
class CoffHeader:
    signature: bytes
    machine: int
    number_of_sections: int
    time_date_stamp: int
    pointer_to_symbol_table: int
    number_of_symbols: int
    size_of_optional_header: int
    characteristics: int

    @classmethod
    def unpack(cls, data: bytes) -> "CoffHeader":
        return cls(*struct.unpack(_COFF_FORMAT, data))

    def pack(self) -> bytes:
        return struct.pack(_COFF_FORMAT, self.signature, self.machine, self.number_of_sections,
                           self.time_date_stamp, self.pointer_to_symbol_table, self.number_of_symbols,
                           self.size_of_optional_header, self.characteristics)


@dataclass(frozen=True)
class DataDirectory:
    virtual_address: int
    size: int


@dataclass(frozen=True)
class OptionalHeader:
    """
    Optional header of a PE32 or PE32+ image.

    ``raw`` holds all size_of_optional_header bytes; the named fields are the
    ones the toolkit reads or rewrites.
    """
    raw: bytes
    magic: int
    major_linker_version: int
    minor_linker_version: int
    size_of_code: int
    address_of_entry_point: int
    image_base: int
    section_alignment: int
    file_alignment: int
    major_image_version: int
    minor_image_version: int
    size_of_image: int
    size_of_headers: int
    checksum: int
    subsystem: int
    dll_characteristics: int
    number_of_rva_and_sizes: int
    data_directories: Tuple[DataDirectory, ...] = ()

    @property
    def is_pe32_plus(self) -> bool:
        return self.magic == PE32_PLUS_MAGIC

    @classmethod
    def unpack(cls, raw: bytes) -> "OptionalHeader":
        magic = struct.unpack_from("<H", raw, 0)[0]
        values = {
            name: struct.unpack_from(fmt, raw, offset)[0]
            for name, (offset, fmt) in OPTIONAL_FIELDS[magic].items()
        }
        directories_offset = DATA_DIRECTORIES_OFFSET[magic]
        count = min(values["number_of_rva_and_sizes"], (len(raw) - directories_offset) // DATA_DIRECTORY_SIZE)
        directories = tuple(
            DataDirectory(*struct.unpack_from("<II", raw, directories_offset + index * DATA_DIRECTORY_SIZE))
            for index in range(max(count, 0))
        )
        return cls(raw=bytes(raw), data_directories=directories, **values)

    def pack(self) -> bytes:
        raw = bytearray(self.raw)
        for name, (offset, fmt) in OPTIONAL_FIELDS[self.magic].items():
            struct.pack_into(fmt, raw, offset, getattr(self, name))
        directories_offset = DATA_DIRECTORIES_OFFSET[self.magic]
        for index, directory in enumerate(self.data_directories):
            struct.pack_into("<II", raw, directories_offset + index * DATA_DIRECTORY_SIZE,
                             directory.virtual_address, directory.size)
        return bytes(raw)

    def field_offset(self, name: str) -> int:
        """
        :param str name: Name of a known optional header field
        :return: Offset of the field relative to the start of the optional header
        :rtype: int
        """
        return OPTIONAL_FIELDS[self.magic][name][0]

    def data_directory_offset(self, index: int) -> int:
        return DATA_DIRECTORIES_OFFSET[self.magic] + index * DATA_DIRECTORY_SIZE

    def directory(self, index: int) -> Optional[DataDirectory]:
        try:
            return self.data_directories[index]
        except IndexError:
            return None


@dataclass(frozen=True)
class SectionEntry:
    raw: bytes
    name: bytes
    virtual_size: int
    virtual_address: int
    size_of_raw_data: int
    pointer_to_raw_data: int
    characteristics: int

    @classmethod
    def unpack(cls, raw: bytes) -> "SectionEntry":
        name, virtual_size, virtual_address, size_of_raw_data, pointer_to_raw_data = \
            struct.unpack_from(_SECTION_FORMAT, raw, 0)
        characteristics = struct.unpack_from("<I", raw, 36)[0]
        return cls(bytes(raw), name, virtual_size, virtual_address, size_of_raw_data, pointer_to_raw_data,
                   characteristics)

    @classmethod
    def create(cls, name: bytes, virtual_size: int, virtual_address: int, size_of_raw_data: int,
               pointer_to_raw_data: int, characteristics: int) -> "SectionEntry":
        entry = cls(bytes(SECTION_ENTRY_SIZE), name.ljust(8, b"\0")[:8], virtual_size, virtual_address,
                    size_of_raw_data, pointer_to_raw_data, characteristics)
        return cls.unpack(entry.pack())

    def pack(self) -> bytes:
        raw = bytearray(self.raw)
        struct.pack_into(_SECTION_FORMAT, raw, 0, self.name, self.virtual_size, self.virtual_address,
                         self.size_of_raw_data, self.pointer_to_raw_data)
        struct.pack_into("<I", raw, 36, self.characteristics)
        return bytes(raw)

    @property
    def display_name(self) -> str:
        return self.name.rstrip(b"\0").decode("latin-1")

    @property
    def mapped_size(self) -> int:
        """
        :return: Size of the section in memory, the loader falls back to the raw size for 0
        :rtype: int
        """
        return self.virtual_size or self.size_of_raw_data

    @property
    def raw_end(self) -> int:
        return self.pointer_to_raw_data + self.size_of_raw_data


@dataclass(frozen=True)
class Section:
    entry: SectionEntry
    content: bytes


@dataclass(frozen=True)
class ImportDescriptor:
    dll_name: str
    functions: Tuple[str, ...]
    original_rvas: Tuple[int, int, int]  # original first thunk, name, first thunk
    raw: bytes = b""


@dataclass(frozen=True)
class ImportDirectory:
    descriptors: Tuple[ImportDescriptor, ...] = ()
    directory_rva: int = 0

    @property
    def import_set(self) -> frozenset:
        return frozenset(
            (descriptor.dll_name.lower(), function)
            for descriptor in self.descriptors
            for function in descriptor.functions
        )


@dataclass(frozen=True)
class Region:
    kind: str
    offset: int
    length: int
    label: str = ""

    @property
    def end(self) -> int:
        return self.offset + self.length


@dataclass(frozen=True)
class PeFile:
    """
    Lossless decomposition of a PE file.

    ``gaps`` holds every byte between the end of the section table and the
    overlay that no section owns, keyed by file offset.
    """
    dos: DosHeader
    coff: CoffHeader
    optional: OptionalHeader
    sections: Tuple[Section, ...]
    overlay: bytes
    raw_length: int
    gaps: Tuple[Tuple[int, bytes], ...] = ()
    imports: ImportDirectory = field(default_factory=ImportDirectory)

    @property
    def e_lfanew(self) -> int:
        return self.dos.e_lfanew

    @property
    def optional_header_offset(self) -> int:
        return self.e_lfanew + COFF_HEADER_SIZE

    @property
    def section_table_offset(self) -> int:
        return self.optional_header_offset + self.coff.size_of_optional_header

    @property
    def section_table_end(self) -> int:
        return self.section_table_offset + SECTION_ENTRY_SIZE * len(self.sections)

    @property
    def headers_end(self) -> int:
        return max(self.section_table_end, self.optional.size_of_headers)

    @property
    def overlay_offset(self) -> int:
        ends = [section.entry.raw_end for section in self.sections if section.entry.size_of_raw_data]
        return max(ends + [self.headers_end])

    @property
    def entry_rva(self) -> int:
        return self.optional.address_of_entry_point

    @property
    def first_raw_offset(self) -> int:
        """
        :return: Lowest raw pointer of a section with file content, or the overlay offset
        :rtype: int
        """
        pointers = [section.entry.pointer_to_raw_data for section in self.sections
                    if section.entry.size_of_raw_data]
        return min(pointers) if pointers else self.overlay_offset

    @property
    def lowest_section_rva(self) -> int:
        addresses = [section.entry.virtual_address for section in self.sections]
        return min(addresses) if addresses else self.optional.size_of_image

    def section_for_rva(self, rva: int) -> Optional[Section]:
        for section in self.sections:
            entry = section.entry
            if entry.virtual_address <= rva < entry.virtual_address + entry.mapped_size:
                return section
        return None

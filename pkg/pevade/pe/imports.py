# -*- coding: utf-8 -*-
"""
Module for building import directories
"""
import struct
from typing import (
    List,
    Sequence,
    Tuple
)

from .structures import IMPORT_DESCRIPTOR_SIZE


def build_import_table(base_rva: int, imports: Sequence[Tuple[str, Sequence[str]]], thunk_size: int,
                       existing: Sequence[bytes] = ()) -> Tuple[bytes, int]:
    """
    Lay out an import directory meant to be mapped at base_rva.

    Descriptors come first: the existing raw descriptors verbatim, one new
    descriptor per entry of imports and the all-zero terminator. Thunk arrays,
    hint/name entries and DLL names follow.

    :param int base_rva: RVA the first byte of the table will be mapped at
    :param imports: DLL names with the functions to import from them, "#n" imports by ordinal
    :param int thunk_size: 4 for PE32, 8 for PE32+
    :param existing: Raw 20-byte descriptors to keep in front of the new ones
    :return: Table bytes and the size of the descriptor array
    :rtype: Tuple[bytes, int]
    """
    descriptor_count = len(existing) + len(imports) + 1
    descriptors_size = descriptor_count * IMPORT_DESCRIPTOR_SIZE
    data = bytearray(descriptors_size)
    for index, raw in enumerate(existing):
        data[index * IMPORT_DESCRIPTOR_SIZE:(index + 1) * IMPORT_DESCRIPTOR_SIZE] = raw

    ordinal_flag = 1 << (thunk_size * 8 - 1)
    for index, (dll_name, functions) in enumerate(imports, start=len(existing)):
        thunks: List[int] = []
        names = bytearray()
        names_rva = base_rva + len(data) + 2 * thunk_size * (len(functions) + 1)
        for function in functions:
            if function.startswith("#"):
                thunks.append(ordinal_flag | int(function[1:]))
                continue
            if len(names) % 2:
                names.append(0)
            thunks.append(names_rva + len(names))
            names += struct.pack("<H", 0) + function.encode("latin-1") + b"\0"
        thunks.append(0)

        thunk_array = b"".join(value.to_bytes(thunk_size, "little") for value in thunks)
        original_first_thunk = base_rva + len(data)
        first_thunk = original_first_thunk + len(thunk_array)
        data += thunk_array + thunk_array + names
        name_rva = base_rva + len(data)
        data += dll_name.encode("latin-1") + b"\0"
        if len(data) % 2:
            data.append(0)

        struct.pack_into("<IIIII", data, index * IMPORT_DESCRIPTOR_SIZE,
                         original_first_thunk, 0, 0, name_rva, first_thunk)

    return bytes(data), descriptors_size

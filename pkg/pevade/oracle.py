# -*- coding: utf-8 -*-
"""
Module simulating the loader's memory mapping to certify that a manipulated
file keeps the functionality of the original.

Equivalence is checked on what the loader sees: the entry point, the machine
and subsystem, the mapped content of every original section and the set of
imported functions. Header bytes below size_of_headers are not compared.
"""
import hashlib
import logging
from dataclasses import dataclass
from enum import Enum
from typing import (
    Iterable,
    List,
    Optional,
    Tuple,
    Union
)

from .exceptions import ImageTooLarge
from .manipulation.base import Kind
from .pe.exceptions import PeFormatError
from .pe.parser import parse
from .pe.structures import PeFile

logger = logging.getLogger(__name__)

DEFAULT_IMAGE_CAP = 256 * 1024 * 1024


class Category(Enum):
    ENTRY_POINT = "EntryPoint"
    SECTION_CONTENT = "SectionContent"
    IMPORT_SHRUNK = "ImportShrunk"
    IMPORT_GROWN = "ImportGrown"
    MACHINE_MISMATCH = "MachineMismatch"
    UNPARSEABLE = "Unparseable"


class Verdict(Enum):
    EQUIVALENT = "Equivalent"
    NOT_EQUIVALENT = "NotEquivalent"


@dataclass(frozen=True)
class Span:
    rva: int
    length: int
    file_offset: Optional[int]  # None for zero fill


@dataclass(frozen=True)
class MappedImage:
    data: bytes
    spans: Tuple[Span, ...]
    pe: PeFile

    def source(self, rva: int) -> Optional[int]:
        """
        :param int rva: Address inside the image
        :return: File offset the byte was loaded from, None if it's zero fill
        :rtype: Optional[int]
        :raise IndexError: The address is outside of the image
        """
        for span in self.spans:
            if span.rva <= rva < span.rva + span.length:
                return None if span.file_offset is None else span.file_offset + rva - span.rva
        raise IndexError(f"RVA 0x{rva:x} is outside of the image")


@dataclass(frozen=True)
class FunctionalDigest:
    entry_rva: int
    machine: int
    subsystem: int
    section_digests: Tuple[Tuple[int, int, str], ...]
    import_set: frozenset


@dataclass(frozen=True)
class Violation:
    category: Category
    detail: str


@dataclass(frozen=True)
class EquivalenceReport:
    violations: Tuple[Violation, ...] = ()

    @property
    def verdict(self) -> Verdict:
        return Verdict.NOT_EQUIVALENT if self.violations else Verdict.EQUIVALENT

    @property
    def equivalent(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if not self.violations:
            return self.verdict.value
        return f"{self.verdict.value}: " + "; ".join(f"{violation.category.value} ({violation.detail})"
                                                     for violation in self.violations)


def map_image(data: bytes, image_cap: int = DEFAULT_IMAGE_CAP) -> MappedImage:
    """
    Map the file the way the loader does

    :param bytes data: Content of the file
    :param int image_cap: Largest size_of_image accepted
    :return: Image of size_of_image bytes with the provenance of every byte
    :rtype: MappedImage
    :raise PeFormatError: The file can't be parsed
    :raise ImageTooLarge: size_of_image is over image_cap
    """
    pe = parse(data)
    size_of_image = pe.optional.size_of_image
    if size_of_image > image_cap:
        raise ImageTooLarge(f"size_of_image 0x{size_of_image:x} is over the cap of 0x{image_cap:x} bytes")

    image = bytearray(size_of_image)
    size_of_headers = min(pe.optional.size_of_headers, size_of_image)
    image[:size_of_headers] = data[:size_of_headers]
    spans = [Span(0, size_of_headers, 0)]
    for section in pe.sections:
        entry = section.entry
        loaded = min(entry.size_of_raw_data, entry.mapped_size)
        image[entry.virtual_address:entry.virtual_address + loaded] = section.content[:loaded]
        if loaded:
            spans.append(Span(entry.virtual_address, loaded, entry.pointer_to_raw_data))

    return MappedImage(bytes(image), tuple(_fill(spans, size_of_image)), pe)


def functional_digest(data: bytes, image_cap: int = DEFAULT_IMAGE_CAP) -> FunctionalDigest:
    """
    :param bytes data: Content of the file
    :param int image_cap: Largest size_of_image accepted
    :return: Loader visible fingerprint of the file
    :rtype: FunctionalDigest
    :raise PeFormatError: The file can't be parsed
    """
    image = map_image(data, image_cap)
    return _digest(image)


def check_equivalence(original: bytes, manipulated: bytes, kinds: Iterable[Union[Kind, str]] = (),
                      image_cap: int = DEFAULT_IMAGE_CAP) -> EquivalenceReport:
    """
    Compare what the loader sees of both files

    :param bytes original: Content of the original file
    :param bytes manipulated: Content of the manipulated file
    :param kinds: Kinds of the manipulations applied, imports may only grow with ApiInjection
    :param int image_cap: Largest size_of_image accepted
    :return: Report listing every difference, empty when the files are equivalent
    :rtype: EquivalenceReport
    :raise PeFormatError: The original file can't be parsed
    """
    kinds = {Kind(kind) for kind in kinds}
    original_image = map_image(original, image_cap)
    try:
        manipulated_image = map_image(manipulated, image_cap)
    except (PeFormatError, ImageTooLarge) as error:
        return EquivalenceReport((Violation(Category.UNPARSEABLE, str(error)),))

    before = _digest(original_image)
    after = _digest(manipulated_image)
    violations: List[Violation] = []
    if before.entry_rva != after.entry_rva:
        violations.append(Violation(Category.ENTRY_POINT, f"0x{before.entry_rva:x} became 0x{after.entry_rva:x}"))
    if (before.machine, before.subsystem) != (after.machine, after.subsystem):
        violations.append(Violation(Category.MACHINE_MISMATCH,
                                    f"machine 0x{before.machine:x}, subsystem {before.subsystem} became "
                                    f"machine 0x{after.machine:x}, subsystem {after.subsystem}"))
    for virtual_address, size, digest in before.section_digests:
        mapped = manipulated_image.data[virtual_address:virtual_address + size]
        if len(mapped) != size or _hash(mapped) != digest:
            violations.append(Violation(Category.SECTION_CONTENT,
                                        f"section at 0x{virtual_address:x} of 0x{size:x} bytes changed"))

    missing = before.import_set - after.import_set
    if missing:
        violations.append(Violation(Category.IMPORT_SHRUNK, ", ".join(sorted(f"{d}!{f}" for d, f in missing))))
    added = after.import_set - before.import_set
    if added and Kind.API_INJECTION not in kinds:
        violations.append(Violation(Category.IMPORT_GROWN, ", ".join(sorted(f"{d}!{f}" for d, f in added))))

    report = EquivalenceReport(tuple(violations))
    if violations:
        logger.info("Files are not equivalent: %s", report)

    return report


def _digest(image: MappedImage) -> FunctionalDigest:
    pe = image.pe
    sections = tuple(
        (section.entry.virtual_address, section.entry.mapped_size,
         _hash(image.data[section.entry.virtual_address:section.entry.virtual_address + section.entry.mapped_size]))
        for section in pe.sections
    )
    return FunctionalDigest(pe.entry_rva, pe.coff.machine, pe.optional.subsystem, sections, pe.imports.import_set)


def _hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _fill(spans: List[Span], size: int) -> List[Span]:
    filled = []
    cursor = 0
    for span in sorted(spans, key=lambda item: item.rva):
        if span.rva > cursor:
            filled.append(Span(cursor, span.rva - cursor, None))
        filled.append(span)
        cursor = max(cursor, span.rva + span.length)
    if cursor < size:
        filled.append(Span(cursor, size - cursor, None))
    return filled

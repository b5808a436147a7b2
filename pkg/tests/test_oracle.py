"""Tests for the functional equivalence oracle."""

import struct

import pytest

from pevade.exceptions import ImageTooLarge
from pevade.manipulation import ApiInjection, plan
from pevade.oracle import (
    Category,
    Verdict,
    check_equivalence,
    functional_digest,
    map_image
)
from pevade.pe import BadMagic


def categories(report):
    return [violation.category for violation in report.violations]


class TestCheckEquivalence:
    def test_identical_files(self, small_pe_bytes):
        report = check_equivalence(small_pe_bytes, small_pe_bytes)
        assert report.equivalent
        assert report.verdict is Verdict.EQUIVALENT
        assert str(report) == "Equivalent"

    def test_section_content_change(self, small_pe, small_pe_bytes):
        data = bytearray(small_pe_bytes)
        data[small_pe.sections[0].entry.pointer_to_raw_data] ^= 0xff
        report = check_equivalence(small_pe_bytes, bytes(data))
        assert categories(report) == [Category.SECTION_CONTENT]
        assert report.verdict is Verdict.NOT_EQUIVALENT
        assert str(report).startswith("NotEquivalent: SectionContent")

    def test_entry_point_change(self, small_pe, small_pe_bytes):
        data = bytearray(small_pe_bytes)
        struct.pack_into("<I", data, small_pe.optional_header_offset + 16, small_pe.entry_rva + 1)
        assert categories(check_equivalence(small_pe_bytes, bytes(data))) == [Category.ENTRY_POINT]

    def test_machine_change(self, small_pe, small_pe_bytes):
        data = bytearray(small_pe_bytes)
        struct.pack_into("<H", data, small_pe.e_lfanew + 4, 0x8664)
        assert categories(check_equivalence(small_pe_bytes, bytes(data))) == [Category.MACHINE_MISMATCH]

    def test_unparseable_result(self, small_pe_bytes):
        report = check_equivalence(small_pe_bytes, b"MZ" + bytes(10))
        assert categories(report) == [Category.UNPARSEABLE]

    def test_unparseable_original_raises(self, small_pe_bytes):
        with pytest.raises(BadMagic):
            check_equivalence(b"XX" + small_pe_bytes[2:], small_pe_bytes)

    def test_imports_can_grow_only_with_api_injection(self, roomy_pe, roomy_pe_bytes):
        grown = plan(roomy_pe, ApiInjection((("advapi32.dll", "RegCloseKey"),))).template
        assert check_equivalence(roomy_pe_bytes, grown, ["api_injection"]).equivalent
        assert categories(check_equivalence(roomy_pe_bytes, grown)) == [Category.IMPORT_GROWN]

    def test_imports_never_shrink(self, roomy_pe, roomy_pe_bytes):
        grown = plan(roomy_pe, ApiInjection((("advapi32.dll", "RegCloseKey"),))).template
        report = check_equivalence(grown, roomy_pe_bytes, ["api_injection"])
        assert Category.IMPORT_SHRUNK in categories(report)

    def test_dos_stub_is_not_functional(self, small_pe_bytes):
        data = bytearray(small_pe_bytes)
        data[0x40:0x80] = bytes(0x40)
        assert check_equivalence(small_pe_bytes, bytes(data)).equivalent


class TestMapImage:
    def test_image_has_size_of_image_bytes(self, roomy_pe, roomy_pe_bytes):
        image = map_image(roomy_pe_bytes)
        assert len(image.data) == roomy_pe.optional.size_of_image

    def test_sources(self, small_pe, small_pe_bytes):
        image = map_image(small_pe_bytes)
        entry = small_pe.sections[0].entry
        assert image.source(0) == 0
        assert image.source(entry.virtual_address + 3) == entry.pointer_to_raw_data + 3
        assert image.source(small_pe.optional.size_of_headers + 1) is None
        with pytest.raises(IndexError):
            image.source(small_pe.optional.size_of_image)

    def test_image_cap(self, small_pe_bytes):
        with pytest.raises(ImageTooLarge):
            map_image(small_pe_bytes, image_cap=1024)

    def test_digest_ignores_the_overlay(self, roomy_pe_bytes):
        assert functional_digest(roomy_pe_bytes) == functional_digest(roomy_pe_bytes[:-100] + bytes(100))

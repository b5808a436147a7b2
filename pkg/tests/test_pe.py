"""Tests for PE parsing, serialization, layout queries and synthesis."""

import struct
from dataclasses import replace

import numpy as np
import pytest

from pevade.command.helper.corpus import IMPORTS, corpus_spec
from pevade.constants import MARKER
from pevade.enums import Label
from pevade.pe import (
    BadMagic,
    BadPeOffset,
    BadSignature,
    InvariantViolation,
    PeFormatError,
    SpecInfeasible,
    SynthSpec,
    Truncated,
    compute_slack_regions,
    parse,
    region_map,
    rva_to_offset,
    serialize,
    synthesize_minimal
)


class TestParse:
    def test_serialize_gives_back_the_same_bytes(self, varied_pe_bytes):
        assert serialize(parse(varied_pe_bytes)) == varied_pe_bytes

    def test_headers_of_minimal_file(self, small_pe, small_pe_bytes):
        assert small_pe.e_lfanew == 0x80
        assert len(small_pe.sections) == 1
        assert small_pe.optional.size_of_headers == 512
        assert small_pe.optional.file_alignment == 512
        assert small_pe.raw_length == len(small_pe_bytes) <= 2048
        assert small_pe.overlay == b""

    def test_overlay_is_kept(self, roomy_pe, roomy_pe_bytes):
        assert len(roomy_pe.overlay) == 100
        assert roomy_pe_bytes.endswith(roomy_pe.overlay)

    def test_imports_are_decoded(self, roomy_pe):
        expected = {(dll, function) for dll, functions in IMPORTS for function in functions}
        assert roomy_pe.imports.import_set == expected
        assert [descriptor.dll_name for descriptor in roomy_pe.imports.descriptors] == ["kernel32.dll", "user32.dll"]

    def test_pe32_plus_imports_are_decoded(self):
        pe = parse(synthesize_minimal(SynthSpec(n_sections=2, pe32_plus=True, imports=IMPORTS[:1])))
        assert pe.optional.is_pe32_plus
        assert pe.imports.import_set == {("kernel32.dll", "ExitProcess"), ("kernel32.dll", "GetProcAddress"),
                                         ("kernel32.dll", "LoadLibraryA")}

    def test_short_file_is_truncated(self):
        with pytest.raises(Truncated):
            parse(b"MZ" + bytes(20))

    def test_bad_magic(self, small_pe_bytes):
        with pytest.raises(BadMagic) as error:
            parse(b"ZM" + small_pe_bytes[2:])
        assert error.value.offset == 0

    def test_pe_offset_outside_of_file(self, small_pe_bytes):
        data = bytearray(small_pe_bytes)
        struct.pack_into("<I", data, 0x3c, len(data) + 16)
        with pytest.raises(BadPeOffset) as error:
            parse(bytes(data))
        assert "offset 0x3c" in str(error.value)

    def test_bad_signature(self, small_pe_bytes):
        data = bytearray(small_pe_bytes)
        data[0x80:0x84] = b"NE\0\0"
        with pytest.raises(BadSignature):
            parse(bytes(data))

    def test_section_past_end_of_file(self, small_pe_bytes):
        with pytest.raises(Truncated):
            parse(small_pe_bytes[:600])

    def test_every_error_is_a_format_error(self):
        with pytest.raises(PeFormatError):
            parse(b"")

    def test_serialize_checks_the_length(self, small_pe):
        with pytest.raises(InvariantViolation):
            serialize(replace(small_pe, raw_length=small_pe.raw_length + 1))

    def test_serialize_checks_the_section_count(self, small_pe):
        broken = replace(small_pe, coff=replace(small_pe.coff, number_of_sections=2))
        with pytest.raises(InvariantViolation):
            serialize(broken)


class TestLayout:
    def test_region_map_covers_the_file_once(self, varied_pe_bytes):
        regions = region_map(parse(varied_pe_bytes))
        assert regions[0].offset == 0
        for previous, region in zip(regions, regions[1:]):
            assert previous.end == region.offset
        assert regions[-1].end == len(varied_pe_bytes)

    def test_region_kinds(self, roomy_pe):
        kinds = [region.kind for region in region_map(roomy_pe)]
        assert kinds[:3] == ["dos_header", "dos_stub", "nt_headers"]
        assert kinds.count("section") == 2
        assert kinds[-1] == "overlay"

    def test_slack_is_the_raw_tail_of_sections(self, small_pe):
        entry = small_pe.sections[0].entry
        expected = [(entry.pointer_to_raw_data + entry.virtual_size, entry.size_of_raw_data - entry.virtual_size)]
        assert compute_slack_regions(small_pe) == (expected if entry.virtual_size < entry.size_of_raw_data else [])

    def test_packed_file_has_no_slack(self):
        pe = parse(synthesize_minimal(SynthSpec(n_sections=2, packed=True, content_seed=4)))
        assert compute_slack_regions(pe) == []

    def test_slack_never_overlaps_headers(self, varied_pe_bytes):
        pe = parse(varied_pe_bytes)
        for offset, length in compute_slack_regions(pe):
            assert length > 0
            assert offset >= pe.optional.size_of_headers

    def test_rva_to_offset(self, small_pe):
        entry = small_pe.sections[0].entry
        assert rva_to_offset(small_pe, 0x10) == 0x10
        assert rva_to_offset(small_pe, entry.virtual_address + 5) == entry.pointer_to_raw_data + 5
        assert rva_to_offset(small_pe, entry.virtual_address + 0x100000) is None


class TestSynthesize:
    def test_same_spec_same_bytes(self):
        spec = SynthSpec(n_sections=3, content_seed=42, overlay_len=10)
        assert synthesize_minimal(spec) == synthesize_minimal(spec)

    def test_seed_changes_content(self):
        assert synthesize_minimal(SynthSpec(content_seed=1)) != synthesize_minimal(SynthSpec(content_seed=2))

    def test_header_reserve_moves_the_first_section(self):
        pe = parse(synthesize_minimal(SynthSpec(header_reserve=8192)))
        assert pe.lowest_section_rva == 12288
        assert pe.first_raw_offset == 512

    def test_entry_point_inside_first_section(self, varied_pe_bytes):
        pe = parse(varied_pe_bytes)
        entry = pe.sections[0].entry
        assert entry.virtual_address <= pe.entry_rva < entry.virtual_address + entry.mapped_size

    @pytest.mark.parametrize("spec", [
        SynthSpec(n_sections=0),
        SynthSpec(n_sections=17),
        SynthSpec(file_alignment=300),
        SynthSpec(file_alignment=4096, section_alignment=512),
        SynthSpec(overlay_len=-1),
        SynthSpec(imports=IMPORTS),
        SynthSpec(first_section_prefix=bytes(513)),
    ])
    def test_infeasible_specs(self, spec):
        with pytest.raises(SpecInfeasible):
            synthesize_minimal(spec)

    def test_marker_goes_into_first_section(self):
        rng = np.random.default_rng(0)
        for label in (Label.MALICIOUS, Label.BENIGN):
            pe = parse(synthesize_minimal(corpus_spec(rng, label)))
            assert (MARKER in pe.sections[0].content) is (label is Label.MALICIOUS)


class TestAgainstPefile:
    @pytest.fixture(autouse=True)
    def pefile(self):
        return pytest.importorskip("pefile")

    def test_layout_agrees(self, pefile, varied_pe_bytes):
        ours = parse(varied_pe_bytes)
        theirs = pefile.PE(data=varied_pe_bytes)
        assert theirs.FILE_HEADER.NumberOfSections == len(ours.sections)
        assert theirs.OPTIONAL_HEADER.AddressOfEntryPoint == ours.entry_rva
        assert theirs.OPTIONAL_HEADER.SizeOfImage == ours.optional.size_of_image
        assert [(section.PointerToRawData, section.SizeOfRawData) for section in theirs.sections] == [
            (section.entry.pointer_to_raw_data, section.entry.size_of_raw_data) for section in ours.sections]
        assert (theirs.get_overlay() or b"") == ours.overlay

    def test_imports_agree(self, pefile, roomy_pe, roomy_pe_bytes):
        theirs = pefile.PE(data=roomy_pe_bytes)
        assert {(entry.dll.decode().lower(), function.name.decode())
                for entry in theirs.DIRECTORY_ENTRY_IMPORT for function in entry.imports} == roomy_pe.imports.import_set

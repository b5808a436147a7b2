"""Tests for the manipulations, their composition and their textual form."""

import numpy as np
import pytest

from pevade.manipulation import (
    ApiInjection,
    BadAlignment,
    EditablePlan,
    Extend,
    FullDos,
    HeaderFields,
    IncompatiblePair,
    Kind,
    LengthMismatch,
    NoHeaderRoom,
    NoSlack,
    OrderViolation,
    Padding,
    PartialDos,
    PerturbationVector,
    SectionInjection,
    Shift,
    SlackSpace,
    apply,
    canonical_order,
    compose,
    format_manipulation,
    parse_manipulation,
    plan
)
from pevade.oracle import Category, check_equivalence
from pevade.pe import SynthSpec, parse, synthesize_minimal


def random_delta(editable: EditablePlan, seed: int = 0) -> PerturbationVector:
    rng = np.random.default_rng(seed)
    return PerturbationVector(rng.integers(0, 256, size=editable.size, dtype=np.uint8).tobytes())


class TestHeaderManipulations:
    def test_extend_inserts_after_dos_stub(self, small_pe, small_pe_bytes):
        result = plan(small_pe, Extend(512))
        assert result.editable == ((0x80, 512),)
        assert result.inserted == ((0x80, 512),)
        assert result.tags == ("extend",)
        assert parse(result.template).e_lfanew == 0x80 + 512
        assert len(result.template) == len(small_pe_bytes) + 512

    def test_extend_keeps_the_file_equivalent(self, small_pe, small_pe_bytes):
        result = plan(small_pe, Extend(512))
        output = result.render(random_delta(result))
        assert check_equivalence(small_pe_bytes, output, result.kinds).equivalent

    def test_extend_needs_aligned_amount(self, small_pe):
        with pytest.raises(BadAlignment):
            plan(small_pe, Extend(100))

    def test_extend_stops_at_first_section(self, small_pe):
        with pytest.raises(NoHeaderRoom):
            plan(small_pe, Extend(4096))

    def test_extend_by_zero_is_identity(self, small_pe, small_pe_bytes):
        result = plan(small_pe, Extend(0))
        assert result.template == small_pe_bytes
        assert result.size == 0

    def test_shift_moves_every_section(self, roomy_pe, roomy_pe_bytes):
        result = plan(roomy_pe, Shift(1024))
        moved = parse(result.template)
        for before, after in zip(roomy_pe.sections, moved.sections):
            assert after.entry.pointer_to_raw_data == before.entry.pointer_to_raw_data + 1024
            assert after.content == before.content
        output = result.render(random_delta(result, 1))
        assert check_equivalence(roomy_pe_bytes, output, result.kinds).equivalent

    def test_header_fields(self, small_pe, small_pe_bytes):
        result = plan(small_pe, HeaderFields())
        assert result.size == 12 + 2 + 4 + 4
        assert result.inserted == ()
        output = result.render(random_delta(result))
        assert len(output) == len(small_pe_bytes)
        assert check_equivalence(small_pe_bytes, output, result.kinds).equivalent


class TestDosManipulations:
    def test_partial_dos_rewrites_fields_only(self, small_pe):
        assert plan(small_pe, PartialDos()).editable == ((2, 58),)

    def test_full_dos_adds_the_stub(self, small_pe, small_pe_bytes):
        result = plan(small_pe, FullDos())
        assert result.editable == ((2, 58), (64, 64))
        output = result.render(random_delta(result))
        assert output[:2] == b"MZ"
        assert output[0x3c:0x40] == small_pe_bytes[0x3c:0x40]
        assert check_equivalence(small_pe_bytes, output).equivalent


class TestSectionManipulations:
    def test_section_injection(self, roomy_pe, roomy_pe_bytes):
        result = plan(roomy_pe, SectionInjection(1024))
        injected = parse(result.template)
        assert len(injected.sections) == 3
        assert injected.sections[-1].entry.display_name == ".adv"
        assert injected.overlay == roomy_pe.overlay
        assert result.size == 1024
        assert result.structural_insertions == 1024
        output = result.render(random_delta(result, 2))
        assert check_equivalence(roomy_pe_bytes, output, result.kinds).equivalent

    def test_section_injection_without_room(self, crowded_pe):
        with pytest.raises(NoHeaderRoom):
            plan(crowded_pe, SectionInjection(512))

    def test_shift_makes_room_for_a_section(self, crowded_pe):
        result = compose(crowded_pe, [Shift(512), SectionInjection(512)])
        assert len(parse(result.template).sections) == 4

    def test_empty_section(self, roomy_pe):
        with pytest.raises(BadAlignment):
            plan(roomy_pe, SectionInjection(0))

    def test_api_injection_grows_imports(self, roomy_pe, roomy_pe_bytes):
        result = plan(roomy_pe, ApiInjection((("advapi32.dll", "RegOpenKeyA"), ("kernel32.dll", "Sleep"))))
        grown = parse(result.template)
        assert grown.imports.import_set == roomy_pe.imports.import_set | {("advapi32.dll", "RegOpenKeyA"),
                                                                          ("kernel32.dll", "Sleep")}
        assert result.size == 0
        assert check_equivalence(roomy_pe_bytes, result.template, result.kinds).equivalent
        report = check_equivalence(roomy_pe_bytes, result.template)
        assert [violation.category for violation in report.violations] == [Category.IMPORT_GROWN]

    def test_api_injection_takes_imports_from_the_perturbation(self, roomy_pe):
        output = apply(roomy_pe, ApiInjection(), PerturbationVector(entries=(("ws2_32.dll", "connect"),)))
        assert ("ws2_32.dll", "connect") in parse(output).imports.import_set

    def test_slack_space(self, small_pe, small_pe_bytes):
        entry = small_pe.sections[0].entry
        if entry.virtual_size == entry.size_of_raw_data:
            pytest.skip("Section content fills its raw size")
        result = plan(small_pe, SlackSpace())
        assert result.editable == ((entry.pointer_to_raw_data + entry.virtual_size,
                                    entry.size_of_raw_data - entry.virtual_size),)
        output = result.render(random_delta(result, 3))
        assert check_equivalence(small_pe_bytes, output, result.kinds).equivalent

    def test_packed_file_has_no_slack_space(self):
        pe = parse(synthesize_minimal(SynthSpec(n_sections=2, packed=True, content_seed=4)))
        with pytest.raises(NoSlack):
            plan(pe, SlackSpace())

    def test_padding(self, small_pe, small_pe_bytes):
        result = plan(small_pe, Padding(100))
        assert result.editable == ((len(small_pe_bytes), 100),)
        assert result.inserted == ((len(small_pe_bytes), 100),)
        assert result.tags == ("padding",)


class TestComposition:
    def test_canonical_order(self):
        manipulations = [Padding(8), FullDos(), SectionInjection(512), Extend(512)]
        assert [manipulation.kind for manipulation in canonical_order(manipulations)] == [
            Kind.EXTEND, Kind.SECTION_INJECTION, Kind.FULL_DOS, Kind.PADDING]

    def test_order_is_checked(self, small_pe):
        with pytest.raises(OrderViolation):
            compose(small_pe, [Padding(8), Extend(512)])

    def test_one_extend_only(self, small_pe):
        with pytest.raises(IncompatiblePair):
            compose(small_pe, [Extend(512), Extend(512)])

    def test_composition_stays_equivalent(self, roomy_pe, roomy_pe_bytes):
        manipulations = canonical_order([Padding(64), FullDos(), SectionInjection(512), Extend(512),
                                         HeaderFields()])
        result = compose(roomy_pe, manipulations)
        assert result.structural_insertions == 512 + 512 + 64
        for seed in range(3):
            output = result.render(random_delta(result, seed))
            assert check_equivalence(roomy_pe_bytes, output, result.kinds).equivalent
            assert result.aligned_original(output) != roomy_pe_bytes

    def test_initial_perturbation_renders_the_template(self, roomy_pe):
        result = compose(roomy_pe, [Extend(512), FullDos()])
        assert result.render(PerturbationVector(result.initial())) == result.template

    def test_regions_are_merged(self, small_pe):
        result = compose(small_pe, [Extend(512), FullDos()])
        assert result.editable == ((2, 58), (64, 64 + 512))

    def test_wrong_perturbation_length(self, small_pe):
        result = plan(small_pe, Extend(512))
        with pytest.raises(LengthMismatch):
            result.render(PerturbationVector(bytes(10)))


class TestTextualForm:
    @pytest.mark.parametrize("text", ["extend:4096", "shift:512", "padding:7", "section_injection:1024:.bss2",
                                      "api_injection:kernel32.dll!Sleep|user32.dll!MessageBoxW", "full_dos",
                                      "partial_dos", "header_fields", "slack_space"])
    def test_parse_then_format(self, text):
        assert format_manipulation(parse_manipulation(text)) == text

    def test_default_section_name(self):
        assert parse_manipulation("section_injection:512") == SectionInjection(512)

    @pytest.mark.parametrize("text", ["explode", "full_dos:3", "api_injection:kernel32.dll", "extend:lots"])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            parse_manipulation(text)


def test_pefile_reads_manipulated_files(roomy_pe):
    pefile = pytest.importorskip("pefile")
    manipulations = [Extend(512), SectionInjection(512), ApiInjection((("ws2_32.dll", "connect"),)), FullDos(),
                     Padding(32)]
    result = compose(roomy_pe, manipulations)
    output = result.render(random_delta(result, 5))
    theirs = pefile.PE(data=output)
    assert theirs.DOS_HEADER.e_lfanew == roomy_pe.e_lfanew + 512
    assert theirs.OPTIONAL_HEADER.AddressOfEntryPoint == roomy_pe.entry_rva
    assert b".adv" in [section.Name.rstrip(b"\0") for section in theirs.sections]
    imports = {(entry.dll.decode().lower(), function.name.decode())
               for entry in theirs.DIRECTORY_ENTRY_IMPORT for function in entry.imports}
    assert ("ws2_32.dll", "connect") in imports

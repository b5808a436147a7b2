# -*- coding: utf-8 -*-
"""
Module containing command for showing the layout of a PE file
"""
from typing import Dict

from .command import Command
from .helper import ui
from .helper.campaign import read_provenance
from ..constants import EXIT_OK
from ..enums import Command as CommandName
from ..pe import (
    compute_slack_regions,
    parse,
    region_map
)

PAYLOAD_TAG = "adv-payload"
EDIT_TAG = "adv-edit"


class Inspect(Command):
    """
    Print headers, sections, the region map, slack space and, with a
    provenance record, the ranges the attack edited
    """
    _name = CommandName.INSPECT.value

    def _execute(self, config: Dict) -> int:
        with open(self.data.file, "rb") as file:
            data = file.read()
        pe = parse(data)
        optional = pe.optional

        ui.print_table([
            ["machine", f"0x{pe.coff.machine:04x}"],
            ["format", "PE32+" if optional.is_pe32_plus else "PE32"],
            ["entry RVA", f"0x{pe.entry_rva:x}"],
            ["sections", pe.coff.number_of_sections],
            ["file alignment", f"0x{optional.file_alignment:x}"],
            ["section alignment", f"0x{optional.section_alignment:x}"],
            ["size of headers", f"0x{optional.size_of_headers:x}"],
            ["size of image", f"0x{optional.size_of_image:x}"],
            ["imports", len(pe.imports.import_set)],
            ["overlay", f"0x{len(pe.overlay):x} bytes at 0x{pe.overlay_offset:x}"],
        ], ["field", "value"], f"{self.data.file}, {len(data)} bytes")

        ui.print_table([[section.entry.display_name, f"0x{section.entry.virtual_address:x}",
                         f"0x{section.entry.virtual_size:x}", f"0x{section.entry.pointer_to_raw_data:x}",
                         f"0x{section.entry.size_of_raw_data:x}", f"0x{section.entry.characteristics:08x}"]
                        for section in pe.sections],
                       ["name", "RVA", "virtual size", "raw offset", "raw size", "characteristics"], "Sections")

        ui.print_table([[region.kind, region.label, f"0x{region.offset:x}", f"0x{region.length:x}"]
                        for region in region_map(pe)], ["region", "label", "offset", "length"], "Regions")

        ui.print_table([[f"0x{offset:x}", f"0x{length:x}"] for offset, length in compute_slack_regions(pe)],
                       ["offset", "length"], "Slack space")

        record = read_provenance(self.data.file)
        if record is not None:
            inserted = [(item["offset"], item["offset"] + item["length"]) for item in record["inserted"]]
            rows = []
            for region in record["regions"]:
                start = region["offset"]
                payload = any(low <= start < high for low, high in inserted)
                rows.append([PAYLOAD_TAG if payload else EDIT_TAG, region["tag"], f"0x{start:x}",
                             f"0x{region['length']:x}"])
            ui.print_table(rows, ["range", "manipulation", "offset", "length"],
                           f"Edited ranges, original {record['original']}, {record['cost']['total']} bytes edited")

        return EXIT_OK

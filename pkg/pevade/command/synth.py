# -*- coding: utf-8 -*-
"""
Module containing command for synthesizing a corpus
"""
from typing import Dict

from .command import Command
from .helper import ui
from .helper.corpus import synthesize_corpus
from ..constants import (
    EXIT_OK,
    MANIFEST_NAME
)
from ..enums import Command as CommandName


class Synth(Command):
    """
    Write benign files and malicious files carrying the marker, with their manifest
    """
    _name = CommandName.SYNTH.value

    def _execute(self, config: Dict) -> int:
        out_dir = config["output"]["dir"]
        manifest = synthesize_corpus(self.data.benign, self.data.malicious, out_dir, config["run"]["seed"])
        counts = manifest["label"].value_counts()
        ui.print_table([["benign", int(counts.get(0, 0))], ["malicious", int(counts.get(1, 0))]],
                       ["label", "files"], f"Corpus written to {out_dir}, manifest {MANIFEST_NAME}")

        return EXIT_OK

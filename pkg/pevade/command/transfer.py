# -*- coding: utf-8 -*-
"""
Module containing command for evaluating adversarial files on other detectors
"""
import logging
import os
from typing import Dict

import lazy_import

from .command import Command
from .helper import ui
from .helper.campaign import (
    adversarial_pairs,
    write_csv
)
from .helper.corpus import CorpusError
from ..attack import transfer_evaluate
from ..constants import (
    ADVERSARIAL_DIR,
    EXIT_OK,
    EXIT_TRANSPORT,
    TRANSFER_COLUMNS,
    TRANSFER_NAME
)
from ..detector import (
    ExternalProtocol,
    ExternalTimeout,
    ExternalUnreachable,
    detector_from_target
)
from ..enums import Command as CommandName

pd = lazy_import.lazy_module("pandas")

logger = logging.getLogger(__name__)


class Transfer(Command):
    """
    Count how many originals and adversarial files every target detects.

    A target that can't be reached gets a row without counts and the command
    exits with 3.
    """
    _name = CommandName.TRANSFER.value

    def _execute(self, config: Dict) -> int:
        directory = self.data.adversarial_dir
        if os.path.isdir(os.path.join(directory, ADVERSARIAL_DIR)):
            directory = os.path.join(directory, ADVERSARIAL_DIR)
        pairs = adversarial_pairs(directory)
        if not pairs:
            raise CorpusError(f"No adversarial file with a provenance record in {directory}")
        originals = [self._read(original) for original, _ in pairs]
        adversarials = [self._read(adversarial) for _, adversarial in pairs]

        rows, failed = [], False
        for target in self.data.targets:
            detector = detector_from_target(target, threshold=config["detector"]["threshold"])
            try:
                row, = transfer_evaluate(originals, adversarials, [detector], [target])
            except (ExternalTimeout, ExternalProtocol, ExternalUnreachable) as error:
                ui.print_error(f"{target}: {error}")
                rows.append((target, None, None))
                failed = True
                continue
            rows.append((row.target_id, row.detections_before, row.detections_after))

        frame = pd.DataFrame(rows, columns=TRANSFER_COLUMNS).astype({"detections_before": "Int64",
                                                                     "detections_after": "Int64"})
        out_dir = config["output"]["dir"]
        os.makedirs(out_dir, exist_ok=True)
        write_csv(frame, os.path.join(out_dir, TRANSFER_NAME))
        ui.print_table([[target, before, after,
                         "" if before is None or not before else f"{(before - after) / before:.1%}"]
                        for target, before, after in rows],
                       ["target", "detections before", "detections after", "drop"],
                       f"{len(pairs)} adversarial files")

        return EXIT_TRANSPORT if failed else EXIT_OK

    @staticmethod
    def _read(path: str) -> bytes:
        with open(path, "rb") as file:
            return file.read()

# -*- coding: utf-8 -*-
"""
Module for measuring how adversarial files transfer to other detectors
"""
import logging
from dataclasses import dataclass
from typing import (
    List,
    Sequence
)

from ..detector import Detector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransferRow:
    target_id: str
    detections_before: int
    detections_after: int

    @property
    def relative_drop(self) -> float:
        """
        :return: Share of the detections lost, 0 without detections before
        :rtype: float
        """
        if not self.detections_before:
            return 0.0
        return (self.detections_before - self.detections_after) / self.detections_before


def count_detections(detector: Detector, files: Sequence[bytes]) -> int:
    return sum(detector.score(data).malicious for data in files)


def transfer_evaluate(originals: Sequence[bytes], adversarials: Sequence[bytes], targets: Sequence[Detector],
                      target_ids: Sequence[str] = None) -> List[TransferRow]:
    """
    Count the files every target detects, before and after the attack

    :param originals: Files before the attack
    :param adversarials: Adversarial file of every original, in the same order
    :param targets: Detectors, each one at its own threshold
    :param target_ids: Name of every target, str(target) by default
    :return: One row per target
    :rtype: List[TransferRow]
    :raise ValueError: The lists are not paired
    """
    if len(originals) != len(adversarials):
        raise ValueError(f"{len(originals)} originals for {len(adversarials)} adversarial files")
    target_ids = [str(target) for target in targets] if target_ids is None else list(target_ids)
    if len(target_ids) != len(targets):
        raise ValueError("Every target needs an id")

    rows = []
    for target_id, target in zip(target_ids, targets):
        row = TransferRow(target_id, count_detections(target, originals), count_detections(target, adversarials))
        logger.info("%s detects %d files before and %d after", target_id, row.detections_before,
                    row.detections_after)
        rows.append(row)

    return rows

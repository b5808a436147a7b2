# -*- coding: utf-8 -*-
"""
Module for measuring the size of a perturbation in edited bytes
"""
from dataclasses import dataclass

import numpy as np

from .exceptions import TooLarge
from .manipulation.engine import (
    EditablePlan,
    PerturbationVector
)
from .manipulation.exceptions import LengthMismatch

MAX_LEVENSHTEIN_CELLS = 10 ** 7


@dataclass(frozen=True)
class EditCost:
    """
    Bytes edited by a manipulation.

    ``inserted`` counts every byte added to the file, whatever its value.
    ``substituted`` counts editable bytes that existed before and now differ.
    ``structural`` counts the other existing bytes the manipulation itself
    rewrote, like e_lfanew or raw pointers.
    """
    inserted: int = 0
    substituted: int = 0
    structural: int = 0

    @property
    def total(self) -> int:
        return self.inserted + self.substituted + self.structural


def edit_cost(plan: EditablePlan, delta: PerturbationVector, original: bytes) -> EditCost:
    """
    Count the bytes the perturbation edits

    :param EditablePlan plan: Plan the perturbation is for
    :param PerturbationVector delta: Perturbation
    :param bytes original: Content of the file the plan was made for
    :return: Edit cost, never lower than the edit distance between the files
    :rtype: EditCost
    :raise LengthMismatch: The perturbation or the original don't match the plan
    """
    return output_cost(plan, plan.render(delta), original)


def output_cost(plan: EditablePlan, output: bytes, original: bytes) -> EditCost:
    """
    :param EditablePlan plan: Plan the output was rendered from
    :param bytes output: Manipulated file
    :param bytes original: Content of the file the plan was made for
    :return: Edit cost of the rendered file
    :rtype: EditCost
    :raise LengthMismatch: The files don't match the plan
    """
    if len(original) != plan.original_length or len(output) != len(plan.template):
        raise LengthMismatch("Files don't have the lengths the plan was made for")

    inserted = plan.inserted_mask()
    aligned = np.frombuffer(output, dtype=np.uint8)[~inserted]
    differs = aligned != np.frombuffer(original, dtype=np.uint8)
    editable = plan.editable_mask()[~inserted]
    substituted = int(np.count_nonzero(differs & editable))

    return EditCost(inserted=plan.structural_insertions, substituted=substituted,
                    structural=int(np.count_nonzero(differs)) - substituted)


def within_budget(cost: EditCost, epsilon: int) -> bool:
    return cost.total <= epsilon


def levenshtein(first: bytes, second: bytes) -> int:
    """
    Edit distance with unit costs for insertion, deletion and substitution

    :param bytes first: First byte string
    :param bytes second: Second byte string
    :return: Minimum number of edits turning first into second
    :rtype: int
    :raise TooLarge: The product of the lengths is over 10 million
    """
    if len(first) * len(second) > MAX_LEVENSHTEIN_CELLS:
        raise TooLarge(f"Edit distance of {len(first)} x {len(second)} bytes is too large to compute")
    if not first or not second:
        return len(first) + len(second)

    target = np.frombuffer(second, dtype=np.uint8)
    steps = np.arange(len(second) + 1)
    previous = steps.copy()
    for index, byte in enumerate(first, start=1):
        current = np.empty_like(previous)
        current[0] = index
        current[1:] = np.minimum(previous[1:] + 1, previous[:-1] + (target != byte))
        # insertions chain left to right
        current = np.minimum.accumulate(current - steps) + steps
        previous = current

    return int(previous[-1])

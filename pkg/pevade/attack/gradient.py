# -*- coding: utf-8 -*-
"""
Module for the white-box attacks: bytes are replaced following the gradient
of the score at the embedding layer of the end-to-end model
"""
import logging
from typing import (
    List,
    Sequence,
    Tuple
)

import numpy as np

from .config import AttackConfig
from .exceptions import InfeasiblePlan
from .loop import (
    LoopState,
    Optimizer,
    attack_loop,
    malice
)
from .result import AttackResult
from ..detector import (
    Detector,
    NotDifferentiable
)
from ..manipulation import Manipulation
from ..pe import PeFile

logger = logging.getLogger(__name__)

DISTANCE_FLOOR = 1e-12
BYTE_VALUES = 256


def best_replacement(gradients: np.ndarray, current: np.ndarray,
                     embedding: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Pick for every position the byte whose embedding moves the most against
    the gradient per unit of distance.

    The lowest byte wins ties. A position keeps its byte when no other byte
    has a positive alignment.

    :param np.ndarray gradients: Score gradient per position, (positions, embedding size)
    :param np.ndarray current: Byte at every position
    :param np.ndarray embedding: Embedding matrix, at least 256 rows
    :return: Replacement byte and its alignment per position
    :rtype: Tuple[np.ndarray, np.ndarray]
    """
    table = np.asarray(embedding, dtype=np.float64)[:BYTE_VALUES]
    gradients = np.asarray(gradients, dtype=np.float64)
    current = np.asarray(current, dtype=np.int64)
    if not len(current):
        return current.astype(np.uint8), np.zeros(0)

    alignment = -(gradients @ table.T) + np.einsum("nd,nd->n", gradients, table[current])[:, None]
    distances = np.linalg.norm(table[:, None, :] - table[None, :, :], axis=2)[current]
    scores = alignment / np.maximum(distances, DISTANCE_FLOOR)
    best = np.argmax(scores, axis=1)
    gains = scores[np.arange(len(current)), best]
    improving = gains > 0

    return np.where(improving, best, current).astype(np.uint8), np.where(improving, gains, 0.0)


class IterativeGradient(Optimizer):
    """
    Replace every byte of the perturbation inside the model window at once,
    keep the step when the score decreases.

    A step that doesn't decrease the score is retried with the better half
    of the replacements by alignment, down to a single replacement, when
    backtracking is on.

    :param bool backtracking: Retry worsening steps with fewer replacements
    """
    name = "iterative_gradient"

    def __init__(self, backtracking: bool = True):
        self.backtracking = backtracking
        self.window = np.zeros(0, dtype=np.int64)

    def prepare(self, state: LoopState) -> None:
        detector = state.evaluator.detector
        if not detector.differentiable:
            raise NotDifferentiable(f"Detector {detector} has no gradient")
        self.window = np.flatnonzero(state.positions < detector.input_length)
        if not len(self.window):
            raise InfeasiblePlan(f"No editable byte inside the first {detector.input_length} bytes read by "
                                 f"the model")

    def step(self, state: LoopState) -> None:
        model = state.evaluator.detector
        gradients = model.gradient(state.render(state.content), state.positions[self.window])
        current = state.content[self.window]
        replacement, gains = best_replacement(gradients, current, model.embedding_matrix)

        changed = np.flatnonzero(replacement != current)
        if not len(changed):
            logger.debug("No byte decreases the score along the gradient")
            return
        order = changed[np.argsort(-gains[changed], kind="stable")]
        selected = self._affordable(state, self.window[order], replacement[order])

        while selected:
            candidate = state.content.copy()
            for index, value in selected:
                candidate[index] = value
            if state.try_content(candidate):
                logger.debug("Replaced %d bytes, score %.6f", len(selected), state.score)
                return
            if not self.backtracking:
                break
            selected = selected[:len(selected) // 2]

    @staticmethod
    def _affordable(state: LoopState, indices: np.ndarray, values: np.ndarray) -> List[Tuple[int, int]]:
        spent = state.substitutions(state.content)
        selected = []
        for index, value in zip(indices.tolist(), values.tolist()):
            if state.substitutable[index]:
                was_original = state.content[index] == state.baseline[index]
                becomes_original = value == state.baseline[index]
                change = int(was_original) - int(becomes_original)
                if spent + change > state.allowance:
                    continue
                spent += change
            selected.append((index, value))
        return selected


def iterative_byte_gradient(pe: PeFile, manipulations: Sequence[Manipulation], model: Detector,
                            config: AttackConfig = None, backtracking: bool = True) -> AttackResult:
    """
    White-box attack replacing the editable bytes along the embedding gradient

    :param PeFile pe: File under attack
    :param manipulations: Composition providing the editable bytes
    :param Detector model: Differentiable detector
    :param AttackConfig config: Attack hyperparameters
    :param bool backtracking: Retry worsening steps with fewer replacements
    :return: Best candidate and trace
    :rtype: AttackResult
    :raise NotDifferentiable: The detector has no gradient
    :raise InfeasiblePlan: No editable byte inside the model window
    """
    if not model.differentiable:
        raise NotDifferentiable(f"Detector {model} has no gradient")
    return attack_loop(pe, manipulations, model, malice, config, IterativeGradient(backtracking))


def single_gradient_step(pe: PeFile, manipulations: Sequence[Manipulation], model: Detector,
                         config: AttackConfig = None) -> AttackResult:
    """
    One iteration of iterative_byte_gradient
    """
    config = (config if config is not None else AttackConfig()).replace(max_iterations=1)
    return iterative_byte_gradient(pe, manipulations, model, config)

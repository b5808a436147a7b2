# -*- coding: utf-8 -*-
"""
Module for the additive attack on continuous inputs, used to check the
optimizer against a closed form optimum
"""
import logging
from dataclasses import dataclass

import numpy as np

from .exceptions import OracleMismatch

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LinearScorer:
    """
    Loss w.x + b, increasing along w
    """
    weights: np.ndarray
    bias: float = 0.0

    def loss(self, x: np.ndarray) -> float:
        return float(np.dot(self.weights, x) + self.bias)

    def gradient(self, x: np.ndarray) -> np.ndarray:  # pylint: disable=unused-argument
        return np.asarray(self.weights, dtype=np.float64)


def project(candidate: np.ndarray, x: np.ndarray, epsilon: float) -> np.ndarray:
    """
    :return: Closest point of the l-infinity ball around x inside the unit box
    :rtype: np.ndarray
    """
    return np.clip(np.clip(candidate, x - epsilon, x + epsilon), 0.0, 1.0)


def projected_gradient_ascent(scorer: LinearScorer, x: np.ndarray, epsilon: float, steps: int = 10,
                              step_size: float = None) -> np.ndarray:
    """
    Maximize the loss with signed gradient steps projected on the constraints

    :param LinearScorer scorer: Differentiable loss
    :param np.ndarray x: Starting point in the unit box
    :param float epsilon: Radius of the l-infinity ball
    :param int steps: Number of steps
    :param float step_size: Length of a step, epsilon by default
    :return: Perturbed point
    :rtype: np.ndarray
    """
    step_size = epsilon if step_size is None else step_size
    current = np.array(x, dtype=np.float64)
    for _ in range(steps):
        current = project(current + step_size * np.sign(scorer.gradient(current)), x, epsilon)
    return current


def additive_sanity_attack(x: np.ndarray, scorer: LinearScorer, epsilon: float, norm: str = "linf",
                           tolerance: float = DEFAULT_TOLERANCE) -> np.ndarray:
    """
    Closed form l-infinity attack on a linear loss, checked against
    projected_gradient_ascent

    :param np.ndarray x: Point in the unit box
    :param LinearScorer scorer: Linear loss to increase
    :param float epsilon: Radius of the l-infinity ball
    :param str norm: Only "linf" is supported
    :param float tolerance: Largest loss gap accepted between both solutions
    :return: clip(x + epsilon * sign(w), 0, 1)
    :rtype: np.ndarray
    :raise ValueError: Unsupported norm, negative epsilon or x outside the unit box
    :raise OracleMismatch: The optimizer didn't reach the closed form loss
    """
    if norm != "linf":
        raise ValueError(f"Unsupported norm {norm!r}, only linf is")
    if epsilon < 0:
        raise ValueError(f"Epsilon can't be negative, got {epsilon}")
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("Input must be inside the unit box")

    closed = np.clip(x + epsilon * np.sign(scorer.gradient(x)), 0.0, 1.0)
    generic = projected_gradient_ascent(scorer, x, epsilon)
    gap = abs(scorer.loss(closed) - scorer.loss(generic))
    logger.debug("Closed form and optimizer losses differ by %g", gap)
    if gap > tolerance:
        raise OracleMismatch(f"Optimizer loss is {gap} away from the closed form optimum")

    return closed

# -*- coding: utf-8 -*-
"""
Module containing the abstract class for detectors
"""
import abc
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import NotDifferentiable

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class DetectorScore:
    malice: float
    threshold: float = DEFAULT_THRESHOLD

    @property
    def malicious(self) -> bool:
        return self.malice >= self.threshold

    @property
    def label(self) -> str:
        return "Malicious" if self.malicious else "Benign"


class Detector(metaclass=abc.ABCMeta):
    """
    Base class for detectors scoring byte sequences.

    Every call to score is counted, the counter is safe to use from several
    threads.

    :param float threshold: Lowest score labeled as malicious
    """
    name: str = "detector"
    differentiable: bool = False

    def __init__(self, threshold: float = DEFAULT_THRESHOLD):
        self.threshold = threshold
        self._queries = 0
        self._queries_lock = threading.Lock()

    @property
    def queries(self) -> int:
        """
        :return: Number of times score has been called
        :rtype: int
        """
        return self._queries

    def score(self, data: bytes) -> DetectorScore:
        """
        Score the given bytes, any byte sequence is accepted

        :param bytes data: Content of a file
        :return: Score in [0, 1]
        :rtype: DetectorScore
        """
        with self._queries_lock:
            self._queries += 1
        malice = float(self.malice(bytes(data)))

        return DetectorScore(min(max(malice, 0.0), 1.0), self.threshold)

    @abc.abstractmethod
    def malice(self, data: bytes) -> float:
        """
        :param bytes data: Content of a file
        :return: Probability that the file is malicious
        :rtype: float
        """

    def gradient(self, data: bytes, positions: Sequence[int]) -> np.ndarray:
        """
        Gradient of the score with respect to the embedding of the bytes at the positions

        :param bytes data: Content of a file
        :param positions: File offsets
        :return: One embedding sized vector per position
        :rtype: np.ndarray
        :raise NotDifferentiable: The detector has no gradient
        """
        raise NotDifferentiable(f"Detector {self.name} has no gradient")

    def __str__(self) -> str:
        return self.name

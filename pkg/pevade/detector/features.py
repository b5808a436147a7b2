# -*- coding: utf-8 -*-
"""
Module for hand-crafted features: byte histogram and header values
"""
from typing import Tuple

import numpy as np

from ..pe.exceptions import PeFormatError
from ..pe.parser import parse

HEADER_FEATURES: Tuple[str, ...] = (
    "number_of_sections",
    "size_of_code",
    "entry_rva",
    "import_count",
    "file_length",
    "overlay_length",
)
FEATURE_NAMES: Tuple[str, ...] = tuple(f"byte_{value:02x}" for value in range(256)) + HEADER_FEATURES
NUMBER_OF_FEATURES = len(FEATURE_NAMES)


def byte_histogram(data: bytes) -> np.ndarray:
    """
    :param bytes data: Content of a file
    :return: Share of every byte value in the file, zeros for an empty file
    :rtype: np.ndarray
    """
    counts = np.bincount(np.frombuffer(bytes(data), dtype=np.uint8), minlength=256).astype(np.float64)
    return counts / max(len(data), 1)


def extract_features(data: bytes) -> np.ndarray:
    """
    Histogram of the bytes followed by log scaled header values.

    Header values are 0 when the data is not a PE file, except file_length.

    :param bytes data: Content of a file
    :return: Feature vector of NUMBER_OF_FEATURES values
    :rtype: np.ndarray
    """
    header = np.zeros(len(HEADER_FEATURES), dtype=np.float64)
    try:
        pe = parse(data)
    except PeFormatError:
        header[HEADER_FEATURES.index("file_length")] = len(data)
    else:
        header[:] = (len(pe.sections), pe.optional.size_of_code, pe.entry_rva, len(pe.imports.import_set),
                     len(data), len(pe.overlay))

    return np.concatenate([byte_histogram(data), np.log1p(header)])

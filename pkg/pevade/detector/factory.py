# -*- coding: utf-8 -*-
"""
Module for building detectors from their configuration
"""
import os
from dataclasses import dataclass
from enum import Enum

from .detector import (
    DEFAULT_THRESHOLD,
    Detector
)
from .exceptions import ModelFormatError
from .external import (
    DEFAULT_TIMEOUT_MS,
    ExternalDetector,
    HttpTransport,
    SubprocessTransport
)
from .storage import load_model


class DetectorKind(Enum):
    END_TO_END = "end_to_end"
    FEATURE = "feature"
    EXTERNAL = "external"


class TransportKind(Enum):
    SUBPROCESS = "subprocess"
    HTTP = "http"


@dataclass(frozen=True)
class DetectorSpec:
    """
    Built-in detector with its model file, or an external detector with its transport
    """
    kind: DetectorKind = DetectorKind.END_TO_END
    model: str = ""
    transport: TransportKind = TransportKind.SUBPROCESS
    command: str = ""
    url: str = ""
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    threshold: float = DEFAULT_THRESHOLD

    def build(self) -> Detector:
        """
        :return: Detector built from these settings
        :rtype: Detector
        :raise ModelFormatError: The model file doesn't hold the model kind
        :raise ValueError: The external transport is not configured
        """
        if self.kind is DetectorKind.EXTERNAL:
            if self.transport is TransportKind.HTTP:
                if not self.url:
                    raise ValueError("detector.url is required for the http transport")
                return ExternalDetector(HttpTransport(self.url), self.timeout_ms, self.threshold)
            if not self.command:
                raise ValueError("detector.command is required for the subprocess transport")
            return ExternalDetector(SubprocessTransport(self.command), self.timeout_ms, self.threshold)

        model = load_model(self.model)
        if model.name != self.kind.value:
            raise ModelFormatError(f"{self.model} holds a {model.name} model, expected {self.kind.value}")
        model.threshold = self.threshold
        return model


def detector_from_target(target: str, timeout_ms: int = DEFAULT_TIMEOUT_MS,
                         threshold: float = DEFAULT_THRESHOLD) -> Detector:
    """
    :param str target: Model file, http(s) URL or cmd:<command line>
    :return: Detector for the target
    :rtype: Detector
    :raise ValueError: The target is none of those
    """
    if os.path.isfile(target):
        model = load_model(target)
        model.threshold = threshold
        return model
    return ExternalDetector.from_target(target, timeout_ms, threshold)

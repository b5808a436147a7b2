# -*- coding: utf-8 -*-
"""
Exceptions raised by detectors, their trainers and model files
"""


class DetectorError(Exception):
    """
    Base exception for all detector errors
    """


class ExternalTimeout(DetectorError):
    """
    The external detector didn't answer in time
    """


class ExternalProtocol(DetectorError):
    """
    The external detector answered with something that is not a score
    """


class ExternalUnreachable(DetectorError):
    """
    The external detector can't be started or connected to
    """


class PositionOutOfWindow(DetectorError):
    """
    A gradient was requested for a byte the model doesn't read
    """


class DegenerateDataset(DetectorError):
    """
    The training set doesn't contain both classes
    """


class NotDifferentiable(DetectorError):
    """
    The detector has no gradient
    """


class ModelFormatError(DetectorError):
    """
    The model file is not a valid PEVD file
    """

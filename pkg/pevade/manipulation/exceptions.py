# -*- coding: utf-8 -*-
"""
Exceptions raised while planning or applying manipulations
"""


class ManipulationError(Exception):
    """
    Base exception for all manipulation errors
    """


class NoHeaderRoom(ManipulationError):
    """
    The headers can't grow to hold another section entry or more header bytes
    """


class NoSlack(ManipulationError):
    """
    The file has no unused space between its sections
    """


class BadAlignment(ManipulationError):
    """
    The amount of bytes to insert doesn't respect the file alignment
    """


class LengthMismatch(ManipulationError):
    """
    The perturbation doesn't fill the editable regions exactly
    """


class IncompatiblePair(ManipulationError):
    """
    Two manipulations of the composition can't be combined
    """


class OrderViolation(ManipulationError):
    """
    The composition is not in canonical order
    """


class MissingDirectory(ManipulationError):
    """
    The optional header has no slot for the import data directory
    """

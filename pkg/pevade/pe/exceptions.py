# -*- coding: utf-8 -*-
"""
Exceptions raised while reading, writing or synthesizing PE files.
"""


class PeFormatError(Exception):
    """
    Base exception for all PE format errors

    :param str message: Description of the problem
    :param int offset: File offset of the offending structure, if known
    """

    def __init__(self, message: str, offset: int = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (offset 0x{offset:x})"
        super().__init__(message)


class BadMagic(PeFormatError):
    """The file doesn't start with the MZ magic"""


class BadPeOffset(PeFormatError):
    """The value at 0x3c doesn't point inside the file"""


class BadSignature(PeFormatError):
    """The PE signature is missing at the offset given in the DOS header"""


class Truncated(PeFormatError):
    """A declared range goes past the end of the file"""


class Malformed(PeFormatError):
    """The structure is readable, but breaks one of the layout rules"""


class InvariantViolation(PeFormatError):
    """A PeFile handed to the serializer breaks one of the layout rules"""


class SpecInfeasible(PeFormatError):
    """The requested synthetic layout can't be built"""

# -*- coding: utf-8 -*-
"""
Exceptions raised by the edit distance and the equivalence oracle
"""


class TooLarge(Exception):
    """
    The edit distance table would be too big to compute
    """


class ImageTooLarge(Exception):
    """
    size_of_image is over the configured cap
    """

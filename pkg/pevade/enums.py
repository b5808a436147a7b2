# -*- coding: utf-8 -*-
"""
Module for defining enumerations used throughout the CLI.
"""

from enum import Enum


class Command(Enum):
    SYNTH = "synth"
    TRAIN = "train"
    ATTACK = "attack"
    TRANSFER = "transfer"
    INSPECT = "inspect"


class Optimizer(Enum):
    ITERATIVE_GRADIENT = "iterative_gradient"
    SINGLE_GRADIENT = "single_gradient"
    GAMMA = "gamma"
    RANDOM = "random"


class Label(Enum):
    BENIGN = 0
    MALICIOUS = 1

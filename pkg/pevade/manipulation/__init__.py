# -*- coding: utf-8 -*-
"""
Functionality preserving manipulations of PE files
"""
from .append import Padding
from .base import (
    Kind,
    Manipulation
)
from .dos import (
    FullDos,
    PartialDos
)
from .engine import (
    EditablePlan,
    EditableRegion,
    PerturbationVector,
    apply,
    apply_composition,
    canonical_order,
    compose,
    format_manipulation,
    parse_manipulation,
    plan
)
from .exceptions import (
    BadAlignment,
    IncompatiblePair,
    LengthMismatch,
    ManipulationError,
    MissingDirectory,
    NoHeaderRoom,
    NoSlack,
    OrderViolation
)
from .header import (
    Extend,
    HeaderFields,
    Shift
)
from .section import (
    ApiInjection,
    SectionInjection,
    SlackSpace
)

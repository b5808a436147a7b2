# -*- coding: utf-8 -*-
"""
Lossless PE parsing, serialization and synthesis
"""
from .exceptions import (
    BadMagic,
    BadPeOffset,
    BadSignature,
    InvariantViolation,
    Malformed,
    PeFormatError,
    SpecInfeasible,
    Truncated
)
from .parser import (
    compute_slack_regions,
    parse,
    region_map,
    rva_to_offset,
    serialize
)
from .structures import (
    ImportDirectory,
    PeFile,
    Region,
    Section,
    SectionEntry
)
from .synth import (
    SynthSpec,
    synthesize_minimal
)

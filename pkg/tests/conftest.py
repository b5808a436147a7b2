"""Shared fixtures: small synthesized PE files and tiny detectors."""

import numpy as np
import pytest
import torch

from pevade.command.helper.corpus import IMPORTS, corpus_spec
from pevade.detector import ByteConvNet, Detector, EndToEndModel
from pevade.enums import Label
from pevade.pe import SynthSpec, parse, synthesize_minimal

WINDOW = 4096


class LengthDetector(Detector):
    """Scores shorter files as more malicious, any appended byte lowers the score."""

    name = "length"

    def __init__(self, scale: float, threshold: float = 0.5):
        super().__init__(threshold)
        self.scale = scale

    def malice(self, data: bytes) -> float:
        return min(1.0, self.scale / max(len(data), 1))


class ConstantDetector(Detector):
    """Scores every file the same."""

    name = "constant"

    def __init__(self, value: float, threshold: float = 0.5):
        super().__init__(threshold)
        self.value = value

    def malice(self, data: bytes) -> float:
        return self.value


class TableDetector(Detector):
    """Looks scores up by file content."""

    name = "table"

    def __init__(self, scores, threshold: float = 0.5):
        super().__init__(threshold)
        self.scores = scores

    def malice(self, data: bytes) -> float:
        return self.scores[data]


@pytest.fixture
def small_pe_bytes():
    """Single section PE32 file, well under 2 KiB."""
    return synthesize_minimal(SynthSpec(content_seed=7))


@pytest.fixture
def small_pe(small_pe_bytes):
    return parse(small_pe_bytes)


@pytest.fixture
def roomy_pe_bytes():
    """Two sections with imports, an overlay and virtual room behind the headers."""
    return synthesize_minimal(SynthSpec(n_sections=2, overlay_len=100, content_seed=3, header_reserve=8192,
                                        imports=IMPORTS))


@pytest.fixture
def roomy_pe(roomy_pe_bytes):
    return parse(roomy_pe_bytes)


@pytest.fixture
def crowded_pe():
    """Three section table ending too close to the first section for another entry."""
    return parse(synthesize_minimal(SynthSpec(n_sections=3, content_seed=5, header_reserve=8192)))


@pytest.fixture(params=[
    SynthSpec(),
    SynthSpec(n_sections=3, content_seed=1),
    SynthSpec(n_sections=2, pe32_plus=True, content_seed=2, overlay_len=33),
    SynthSpec(n_sections=2, packed=True, content_seed=4),
    SynthSpec(n_sections=4, file_alignment=1024, section_alignment=8192, content_seed=6),
    SynthSpec(n_sections=2, imports=IMPORTS, header_reserve=4096, content_seed=8),
], ids=["minimal", "three-sections", "pe32-plus-overlay", "packed", "wide-alignment", "imports"])
def varied_pe_bytes(request):
    return synthesize_minimal(request.param)


@pytest.fixture
def tiny_corpus():
    """Six benign and six marked malicious files as (bytes, label) pairs."""
    rng = np.random.default_rng(11)
    return [(synthesize_minimal(corpus_spec(rng, label)), label.value)
            for label in (Label.BENIGN, Label.MALICIOUS) for _ in range(6)]


@pytest.fixture
def zero_model():
    return EndToEndModel.zeros(input_length=WINDOW)


@pytest.fixture
def random_model():
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(0)
        network = ByteConvNet()
    return EndToEndModel(network, input_length=WINDOW)


@pytest.fixture
def length_detector(roomy_pe_bytes):
    return LengthDetector(0.9 * len(roomy_pe_bytes))

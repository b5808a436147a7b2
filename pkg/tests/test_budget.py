"""Tests for the edit cost of manipulations and the edit distance."""

import numpy as np
import pytest

from pevade.budget import (
    EditCost,
    edit_cost,
    levenshtein,
    output_cost,
    within_budget
)
from pevade.exceptions import TooLarge
from pevade.manipulation import (
    Extend,
    FullDos,
    LengthMismatch,
    Padding,
    PerturbationVector,
    compose,
    plan
)


class TestLevenshtein:
    @pytest.mark.parametrize("first, second, distance", [
        (b"kitten", b"sitting", 3),
        (b"", b"abc", 3),
        (b"abc", b"", 3),
        (b"same", b"same", 0),
        (b"flaw", b"lawn", 2),
        (b"\x00\x01\x02", b"\x02\x01\x00", 2),
    ])
    def test_distances(self, first, second, distance):
        assert levenshtein(first, second) == distance

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        first = rng.integers(0, 4, size=60, dtype=np.uint8).tobytes()
        second = rng.integers(0, 4, size=45, dtype=np.uint8).tobytes()
        assert levenshtein(first, second) == levenshtein(second, first)

    @pytest.mark.parametrize("seed", range(8))
    def test_metric(self, seed):
        rng = np.random.default_rng(seed)
        first, second, third = (rng.integers(0, 3, size=rng.integers(0, 40), dtype=np.uint8).tobytes()
                                for _ in range(3))
        for text in (first, second, third):
            assert levenshtein(text, text) == 0
        for one, other in ((first, second), (second, third), (first, third)):
            distance = levenshtein(one, other)
            assert (distance == 0) == (one == other)
            assert distance == levenshtein(other, one)
            assert abs(len(one) - len(other)) <= distance <= max(len(one), len(other))
        assert levenshtein(first, third) <= levenshtein(first, second) + levenshtein(second, third)

    def test_single_edit(self):
        rng = np.random.default_rng(3)
        text = rng.integers(0, 256, size=50, dtype=np.uint8).tobytes()
        changed = text[:20] + bytes([text[20] ^ 1]) + text[21:]
        assert levenshtein(text, changed) == 1
        assert levenshtein(text, text[:20] + text[21:]) == 1
        assert levenshtein(text, text[:20] + b"x" + text[20:]) == 1

    def test_too_large(self):
        with pytest.raises(TooLarge):
            levenshtein(bytes(4000), bytes(4000))


class TestEditCost:
    def test_total(self):
        assert EditCost(3, 4, 5).total == 12
        assert within_budget(EditCost(3, 4, 5), 12)
        assert not within_budget(EditCost(3, 4, 5), 11)

    def test_unchanged_rewrite_costs_nothing(self, small_pe, small_pe_bytes):
        result = plan(small_pe, FullDos())
        assert edit_cost(result, PerturbationVector(result.initial()), small_pe_bytes) == EditCost()

    def test_substitutions_are_counted(self, small_pe, small_pe_bytes):
        result = plan(small_pe, FullDos())
        content = bytearray(result.initial())
        for index in (0, 5, 70):
            content[index] ^= 0x55
        assert edit_cost(result, PerturbationVector(bytes(content)), small_pe_bytes) == EditCost(substituted=3)

    def test_inserted_bytes_always_cost(self, small_pe, small_pe_bytes):
        result = plan(small_pe, Padding(40))
        assert edit_cost(result, PerturbationVector(bytes(40)), small_pe_bytes) == EditCost(inserted=40)
        assert edit_cost(result, PerturbationVector(b"\xff" * 40), small_pe_bytes) == EditCost(inserted=40)

    def test_extend_pays_for_header_rewrites(self, small_pe, small_pe_bytes):
        result = plan(small_pe, Extend(512))
        cost = edit_cost(result, PerturbationVector(result.initial()), small_pe_bytes)
        assert cost.inserted == 512
        assert cost.substituted == 0
        assert cost.structural == len(result.structural_substitutions) > 0

    def test_cost_bounds_the_edit_distance(self, small_pe, small_pe_bytes):
        result = compose(small_pe, [Extend(512), FullDos(), Padding(16)])
        rng = np.random.default_rng(1)
        output = result.render(PerturbationVector(rng.integers(0, 256, size=result.size, dtype=np.uint8).tobytes()))
        assert output_cost(result, output, small_pe_bytes).total >= levenshtein(small_pe_bytes, output)

    def test_mismatched_original(self, small_pe, small_pe_bytes):
        result = plan(small_pe, Padding(8))
        with pytest.raises(LengthMismatch):
            output_cost(result, result.template, small_pe_bytes + b"\0")

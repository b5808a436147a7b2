# -*- coding: utf-8 -*-
"""
Module for planning, composing and applying manipulations
"""
import logging
from dataclasses import (
    dataclass,
    replace
)
from typing import (
    Dict,
    Iterable,
    List,
    Sequence,
    Tuple,
    Type
)

import numpy as np

from .append import Padding
from .base import (
    Kind,
    Manipulation
)
from .dos import (
    FullDos,
    PartialDos
)
from .exceptions import (
    IncompatiblePair,
    LengthMismatch,
    OrderViolation
)
from .header import (
    Extend,
    HeaderFields,
    Shift
)
from .section import (
    DEFAULT_SECTION_NAME,
    ApiInjection,
    SectionInjection,
    SlackSpace
)
from ..pe.parser import (
    parse,
    region_map,
    serialize
)
from ..pe.structures import (
    PeFile,
    Region
)

logger = logging.getLogger(__name__)

MANIPULATIONS: Dict[str, Type[Manipulation]] = {
    cls.kind.value: cls for cls in (Extend, Shift, SectionInjection, ApiInjection, PartialDos, FullDos,
                                    HeaderFields, SlackSpace, Padding)
}


@dataclass(frozen=True)
class PerturbationVector:
    """
    Parameters of a manipulation: the bytes written into the editable regions
    in offset order and, for ApiInjection, the imports to add
    """
    content: bytes = b""
    entries: Tuple[Tuple[str, str], ...] = ()


@dataclass(frozen=True)
class EditableRegion:
    offset: int
    length: int
    tag: str

    @property
    def end(self) -> int:
        return self.offset + self.length


@dataclass(frozen=True)
class EditablePlan:
    """
    Manipulated file with every optimizer controlled byte at its initial value

    ``inserted`` lists the blocks of bytes that didn't exist in the original
    file. Removing them from the template leaves a byte string aligned with
    the original, ``structural_substitutions`` are the positions where the
    two differ outside of the editable regions.
    """
    template: bytes
    original_length: int
    regions: Tuple[EditableRegion, ...] = ()
    inserted: Tuple[Tuple[int, int], ...] = ()
    structural_substitutions: Tuple[int, ...] = ()
    manipulations: Tuple[Manipulation, ...] = ()

    @property
    def editable(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((region.offset, region.length) for region in self.regions)

    @property
    def tags(self) -> Tuple[str, ...]:
        return tuple(region.tag for region in self.regions)

    @property
    def size(self) -> int:
        """
        :return: Number of bytes a perturbation must have
        :rtype: int
        """
        return sum(region.length for region in self.regions)

    @property
    def structural_insertions(self) -> int:
        return sum(length for _, length in self.inserted)

    @property
    def output_layout(self) -> Tuple[Region, ...]:
        return region_map(parse(self.template))

    @property
    def kinds(self) -> frozenset:
        return frozenset(manipulation.kind for manipulation in self.manipulations)

    def inserted_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.template), dtype=bool)
        for offset, length in self.inserted:
            mask[offset:offset + length] = True
        return mask

    def editable_mask(self) -> np.ndarray:
        mask = np.zeros(len(self.template), dtype=bool)
        for region in self.regions:
            mask[region.offset:region.end] = True
        return mask

    def editable_positions(self) -> np.ndarray:
        """
        :return: Output offsets of the perturbation bytes, in perturbation order
        :rtype: np.ndarray
        """
        if not self.regions:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([np.arange(region.offset, region.end) for region in self.regions])

    def initial(self) -> bytes:
        """
        :return: Perturbation leaving the template unchanged: original bytes in
                 rewritten regions, zeros in inserted ones
        :rtype: bytes
        """
        return b"".join(self.template[region.offset:region.end] for region in self.regions)

    def render(self, delta: PerturbationVector) -> bytes:
        """
        Write the perturbation into the template

        :param PerturbationVector delta: Bytes for the editable regions, in offset order
        :return: Manipulated file
        :rtype: bytes
        :raise LengthMismatch: The perturbation doesn't fill the editable regions exactly
        """
        content = bytes(delta.content)
        if len(content) != self.size:
            raise LengthMismatch(f"Perturbation has {len(content)} bytes, editable regions have {self.size}")
        output = bytearray(self.template)
        position = 0
        for region in self.regions:
            output[region.offset:region.end] = content[position:position + region.length]
            position += region.length
        return bytes(output)

    def aligned_original(self, output: bytes) -> bytes:
        """
        :param bytes output: File rendered from this plan
        :return: The output without inserted bytes, position aligned with the original file
        :rtype: bytes
        """
        array = np.frombuffer(output, dtype=np.uint8)
        return array[~self.inserted_mask()].tobytes()


def canonical_order(manipulations: Iterable[Manipulation]) -> List[Manipulation]:
    """
    Sort manipulations into the order compose accepts: Extend, Shift,
    SectionInjection, ApiInjection, the in place rewrites, Padding

    :param manipulations: Manipulations in any order
    :return: The same manipulations, stable sorted
    :rtype: List[Manipulation]
    """
    return sorted(manipulations, key=lambda manipulation: manipulation.rank)


def compose(pe: PeFile, manipulations: Sequence[Manipulation]) -> EditablePlan:
    """
    Apply the manipulations one after the other and collect their editable regions

    :param PeFile pe: File to manipulate
    :param manipulations: Manipulations in canonical order
    :return: Plan with regions in output coordinates, overlapping or touching regions merged
    :rtype: EditablePlan
    :raise OrderViolation: The manipulations are not in canonical order
    :raise IncompatiblePair: The composition contains two Extend manipulations
    """
    manipulations = tuple(manipulations)
    _check_composition(manipulations)
    original = serialize(pe)

    regions: List[EditableRegion] = []
    inserted: List[Tuple[int, int]] = []
    current_pe, current = pe, original
    for manipulation in manipulations:
        step = manipulation.transform(current_pe, current)
        if step.inserted is not None:
            at, length = step.inserted
            regions = [piece for region in regions for piece in _rebase_region(region, at, length)]
            inserted = [(offset + length if offset >= at else offset, size) for offset, size in inserted]
            inserted.append(step.inserted)
        for start, length in step.claimed:
            regions = [piece for region in regions for piece in _subtract(region, start, start + length)]
        regions += [EditableRegion(offset, length, manipulation.tag) for offset, length in step.editable if length]
        current = step.data
        current_pe = parse(current)

    result = EditablePlan(template=current, original_length=len(original), regions=tuple(_merge(regions)),
                          inserted=tuple(_merge_ranges(inserted)), manipulations=manipulations)
    result = replace(result, structural_substitutions=_structural_substitutions(result, original))
    logger.debug("Composed %s: %d editable bytes, %d inserted, %d structural substitutions",
                 ", ".join(map(str, manipulations)) or "identity", result.size, result.structural_insertions,
                 len(result.structural_substitutions))

    return result


def plan(pe: PeFile, manipulation: Manipulation) -> EditablePlan:
    """
    :param PeFile pe: File to manipulate
    :param Manipulation manipulation: Manipulation to plan
    :return: Plan of the single manipulation
    :rtype: EditablePlan
    """
    return compose(pe, [manipulation])


def apply(pe: PeFile, manipulation: Manipulation, delta: PerturbationVector) -> bytes:
    """
    Realize the manipulation with the given perturbation

    :param PeFile pe: File to manipulate
    :param Manipulation manipulation: Manipulation to apply
    :param PerturbationVector delta: Perturbation matching the plan
    :return: Manipulated file
    :rtype: bytes
    :raise LengthMismatch: The perturbation doesn't match the plan
    """
    return apply_composition(pe, [manipulation], delta)


def apply_composition(pe: PeFile, manipulations: Sequence[Manipulation], delta: PerturbationVector) -> bytes:
    return compose(pe, with_entries(manipulations, delta.entries)).render(delta)


def with_entries(manipulations: Sequence[Manipulation], entries: Sequence[Tuple[str, str]]) -> List[Manipulation]:
    """
    Replace the imports of ApiInjection with the ones carried by a perturbation

    :param manipulations: Composition
    :param entries: Imports to add, nothing is replaced when empty
    :return: Composition with the imports replaced
    :rtype: List[Manipulation]
    :raise LengthMismatch: Imports given without an ApiInjection to carry them
    """
    if not entries:
        return list(manipulations)
    if not any(isinstance(manipulation, ApiInjection) for manipulation in manipulations):
        raise LengthMismatch("Perturbation carries imports, but no ApiInjection is composed")
    return [ApiInjection(tuple(entries)) if isinstance(manipulation, ApiInjection) else manipulation
            for manipulation in manipulations]


def parse_manipulation(text: str) -> Manipulation:
    """
    Build a manipulation from its textual form: kind[:argument]

    Extend, Shift, Padding and SectionInjection take a byte count,
    SectionInjection optionally followed by :name. ApiInjection takes
    dll!function pairs separated by |.

    :param str text: Textual form, for example "extend:4096"
    :return: Manipulation
    :rtype: Manipulation
    :raise ValueError: Unknown kind or invalid argument
    """
    name, _, argument = text.strip().partition(":")
    try:
        cls = MANIPULATIONS[name.strip().lower()]
    except KeyError as error:
        raise ValueError(f"Unknown manipulation {name!r}, choose from: {', '.join(MANIPULATIONS)}") from error

    if cls in (Extend, Shift, Padding):
        return cls(int(argument, 0))
    if cls is SectionInjection:
        size, _, section_name = argument.partition(":")
        return SectionInjection(int(size, 0), section_name.encode("latin-1") if section_name else DEFAULT_SECTION_NAME)
    if cls is ApiInjection:
        entries = []
        for pair in filter(None, argument.split("|")):
            dll_name, separator, function = pair.partition("!")
            if not separator or not dll_name or not function:
                raise ValueError(f"Import {pair!r} is not in dll!function form")
            entries.append((dll_name, function))
        return ApiInjection(tuple(entries))
    if argument:
        raise ValueError(f"Manipulation {name!r} takes no argument")

    return cls()


def format_manipulation(manipulation: Manipulation) -> str:
    """
    :param Manipulation manipulation: Manipulation to describe
    :return: Textual form accepted by parse_manipulation
    :rtype: str
    """
    if isinstance(manipulation, (Extend, Shift)):
        return f"{manipulation.kind.value}:{manipulation.amount}"
    if isinstance(manipulation, Padding):
        return f"{manipulation.kind.value}:{manipulation.size}"
    if isinstance(manipulation, SectionInjection):
        return f"{manipulation.kind.value}:{manipulation.size}:{manipulation.name.decode('latin-1')}"
    if isinstance(manipulation, ApiInjection):
        return f"{manipulation.kind.value}:" + "|".join(f"{dll}!{function}" for dll, function in manipulation.entries)
    return manipulation.kind.value


def _check_composition(manipulations: Sequence[Manipulation]) -> None:
    if sum(manipulation.kind is Kind.EXTEND for manipulation in manipulations) > 1:
        raise IncompatiblePair("A composition can hold only one Extend")
    for previous, manipulation in zip(manipulations, manipulations[1:]):
        if manipulation.rank < previous.rank:
            raise OrderViolation(f"{manipulation} can't follow {previous}, use canonical_order")


def _rebase_region(region: EditableRegion, at: int, length: int) -> List[EditableRegion]:
    if region.offset >= at:
        return [replace(region, offset=region.offset + length)]
    if region.end <= at:
        return [region]
    return [replace(region, length=at - region.offset),
            replace(region, offset=at + length, length=region.end - at)]


def _subtract(region: EditableRegion, start: int, end: int) -> List[EditableRegion]:
    if end <= region.offset or start >= region.end:
        return [region]
    pieces = []
    if region.offset < start:
        pieces.append(replace(region, length=start - region.offset))
    if end < region.end:
        pieces.append(replace(region, offset=end, length=region.end - end))
    return pieces


def _merge(regions: Iterable[EditableRegion]) -> List[EditableRegion]:
    merged: List[EditableRegion] = []
    for region in sorted(regions, key=lambda item: item.offset):
        if merged and region.offset <= merged[-1].end:
            last = merged[-1]
            tags = last.tag.split("+")
            tag = last.tag if region.tag in tags else f"{last.tag}+{region.tag}"
            merged[-1] = EditableRegion(last.offset, max(last.end, region.end) - last.offset, tag)
        else:
            merged.append(region)
    return merged


def _merge_ranges(ranges: Iterable[Tuple[int, int]]) -> List[Tuple[int, int]]:
    merged: List[Tuple[int, int]] = []
    for offset, length in sorted(ranges):
        if merged and offset <= merged[-1][0] + merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][0] + merged[-1][1], offset + length) - merged[-1][0])
        else:
            merged.append((offset, length))
    return merged


def _structural_substitutions(plan: EditablePlan, original: bytes) -> Tuple[int, ...]:
    template = np.frombuffer(plan.template, dtype=np.uint8)
    kept = ~plan.inserted_mask()
    positions = np.flatnonzero(kept)
    aligned = template[kept]
    if len(aligned) != len(original):
        raise AssertionError("Manipulations changed the file length without declaring an insertion")
    changed = positions[aligned != np.frombuffer(original, dtype=np.uint8)]
    return tuple(int(position) for position in changed[~plan.editable_mask()[changed]])

# -*- coding: utf-8 -*-
"""
Module for the black-box genetic attack injecting content of benign files.

A genome holds one gene in [0, 1] per donor section, the payload is the
concatenation of the first round(gene * length) bytes of every donor in pool
order. The payload goes into a new section, or after the overlay for the
padding variant.
"""
import logging
import os
from dataclasses import dataclass
from enum import Enum
from typing import (
    Iterable,
    List,
    Optional,
    Tuple
)

import numpy as np

from .config import AttackConfig
from .exceptions import (
    BudgetZeroWithInsertions,
    EmptyDonorPool,
    InfeasiblePlan,
    NoBenignFiles
)
from .loop import CandidateEvaluator
from .result import AttackResult
from ..budget import output_cost
from ..detector import Detector
from ..manipulation import (
    EditablePlan,
    ManipulationError,
    NoHeaderRoom,
    Padding,
    PerturbationVector,
    SectionInjection,
    Shift,
    compose
)
from ..pe import (
    PeFile,
    PeFormatError,
    parse,
    serialize
)
from ..pe.structures import align_up

logger = logging.getLogger(__name__)

DEFAULT_MAX_DONORS = 32
DEFAULT_DONOR_SLICE = 4096


class GammaVariant(Enum):
    SECTION = "section"
    PADDING = "padding"


@dataclass(frozen=True)
class Donor:
    """
    Content of a benign section, offset is where it starts in the source file
    """
    source: str
    section: str
    offset: int
    content: bytes


@dataclass(frozen=True)
class DonorPool:
    donors: Tuple[Donor, ...] = ()

    def __len__(self) -> int:
        return len(self.donors)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([len(donor.content) for donor in self.donors], dtype=np.int64)

    def slice_lengths(self, genes: np.ndarray, cap: int) -> np.ndarray:
        """
        :param np.ndarray genes: Fraction of every donor to take
        :param int cap: Largest payload allowed
        :return: Bytes taken from every donor, scaled down to fit the cap
        :rtype: np.ndarray
        """
        lengths = np.rint(np.clip(genes, 0.0, 1.0) * self.lengths).astype(np.int64)
        total = int(lengths.sum())
        if total > cap:
            lengths = (lengths * max(cap, 0)) // total
        return lengths

    def payload(self, lengths: np.ndarray) -> bytes:
        return b"".join(donor.content[:length] for donor, length in zip(self.donors, lengths.tolist()))


def harvest(files: Iterable[Tuple[str, bytes]], max_sections: int = DEFAULT_MAX_DONORS, seed: int = 0,
            max_slice: int = DEFAULT_DONOR_SLICE) -> DonorPool:
    """
    Collect the content of the sections of benign files

    :param files: Source name and content of every benign file
    :param int max_sections: Largest number of donors kept
    :param int seed: Seed of the donor selection
    :param int max_slice: Largest number of bytes kept per donor
    :return: Donors in a seeded order
    :rtype: DonorPool
    :raise NoBenignFiles: No file could be parsed
    """
    donors: List[Donor] = []
    parsed = 0
    for source, data in files:
        try:
            pe = parse(data)
        except PeFormatError as error:
            logger.warning("Skipping donor file %s: %s", source, error)
            continue
        parsed += 1
        for section in pe.sections:
            entry = section.entry
            length = min(entry.size_of_raw_data, entry.virtual_size or entry.size_of_raw_data, max_slice)
            if length > 0:
                donors.append(Donor(source, entry.display_name, entry.pointer_to_raw_data,
                                    bytes(section.content[:length])))
    if not parsed or not donors:
        raise NoBenignFiles("No benign file with section content to harvest")

    order = np.random.default_rng(seed).permutation(len(donors))[:max_sections]
    pool = DonorPool(tuple(donors[index] for index in order.tolist()))
    logger.info("Harvested %d donor sections from %d files", len(pool), parsed)

    return pool


def harvest_donors(paths: Iterable[str], max_sections: int = DEFAULT_MAX_DONORS, seed: int = 0,
                   max_slice: int = DEFAULT_DONOR_SLICE) -> DonorPool:
    """
    :param paths: Benign files, or directories holding them
    :return: Donors harvested from the files, sorted by path before the seeded selection
    :rtype: DonorPool
    :raise NoBenignFiles: No file could be parsed
    """
    files = []
    for path in paths:
        if os.path.isdir(path):
            files += [os.path.join(path, name) for name in os.listdir(path)
                      if os.path.isfile(os.path.join(path, name))]
        else:
            files.append(path)

    def read(path: str) -> bytes:
        with open(path, "rb") as file:
            return file.read()

    return harvest(((path, read(path)) for path in sorted(files)), max_sections, seed, max_slice)


class _Injector:
    """
    Renders payloads into the file under attack
    """

    def __init__(self, pe: PeFile, variant: GammaVariant, epsilon: int):
        self.pe = pe
        self.variant = variant
        self.original = serialize(pe)
        self.prefix = []
        if variant is GammaVariant.PADDING:
            self.block = 1
            base_cost = 0
        else:
            self.block = pe.optional.file_alignment
            try:
                probe = compose(pe, [SectionInjection(self.block)])
            except NoHeaderRoom:
                self.prefix = [Shift(self.block)]
                probe = self._compose(self.block)
            except ManipulationError as error:
                raise InfeasiblePlan(f"Can't inject a section: {error}") from error
            base_cost = probe.structural_insertions - self.block + len(probe.structural_substitutions)
        self.cap = epsilon - base_cost - (self.block - 1)
        if base_cost > epsilon:
            raise BudgetZeroWithInsertions(f"Injecting the payload edits {base_cost} bytes by itself, budget is "
                                           f"{epsilon}")

    def _compose(self, size: int) -> EditablePlan:
        try:
            if self.variant is GammaVariant.PADDING:
                return compose(self.pe, [Padding(size)])
            return compose(self.pe, self.prefix + [SectionInjection(size)])
        except ManipulationError as error:
            raise InfeasiblePlan(f"Can't inject the payload: {error}") from error

    def render(self, payload: bytes) -> Tuple[bytes, Optional[EditablePlan]]:
        if not payload:
            return self.original, None
        size = align_up(len(payload), self.block)
        plan = self._compose(size)
        return plan.render(PerturbationVector(payload + bytes(size - len(payload)))), plan


def gamma_attack(pe: PeFile, donors: DonorPool, detector: Detector, config: AttackConfig = None,
                 variant: GammaVariant = GammaVariant.SECTION) -> AttackResult:
    """
    Genetic search of the donor slices minimizing score + penalty * payload bytes

    Every generation scores the whole population, one query per genome. The
    first population holds the all-zero genome, the unchanged file. The k
    best of survivors and children survive, children come from uniform
    crossover of two survivors and per gene Gaussian mutation. The search
    stops on evasion or before a generation would go over max_queries.

    :param PeFile pe: File under attack
    :param DonorPool donors: Benign content
    :param Detector detector: Detector to evade, only its scores are used
    :param AttackConfig config: Attack hyperparameters
    :param GammaVariant variant: Payload in a new section or after the overlay
    :return: Best candidate and trace, one trace step per generation
    :rtype: AttackResult
    :raise EmptyDonorPool: No donor
    :raise InfeasiblePlan: The payload can't be injected or no generation fits the query budget
    :raise BudgetZeroWithInsertions: The budget doesn't cover the section injection
    """
    config = config if config is not None else AttackConfig()
    if not len(donors):
        raise EmptyDonorPool("The genetic attack needs at least one donor section")
    if config.max_queries < config.population:
        raise InfeasiblePlan(f"{config.max_queries} queries can't score a population of {config.population}")

    injector = _Injector(pe, variant, config.epsilon)
    evaluator = CandidateEvaluator(injector.original, detector, config)
    rng = np.random.default_rng(config.seed)

    def fitness(genomes: np.ndarray) -> np.ndarray:
        values = []
        for genes in genomes:
            payload = donors.payload(donors.slice_lengths(genes, injector.cap))
            output, plan = injector.render(payload)
            while plan is not None and output_cost(plan, output, injector.original).total > config.epsilon:
                payload = payload[:max(len(payload) - injector.block, 0)]
                output, plan = injector.render(payload)
            penalty = config.payload_penalty * len(payload)
            values.append(evaluator.evaluate(output, plan, penalty).malice + penalty)
        return np.array(values)

    population = rng.random((config.population, len(donors)))
    population[0] = 0.0
    scores = fitness(population)
    evaluator.record(0)
    generations = 1
    survivors, survivor_scores = _select(population, scores, config.elitism)

    while not evaluator.evaded and evaluator.queries + config.population <= config.max_queries:
        children = _breed(survivors, config, rng)
        children_scores = fitness(children)
        evaluator.record(generations)
        generations += 1
        survivors, survivor_scores = _select(np.concatenate([survivors, children]),
                                             np.concatenate([survivor_scores, children_scores]), config.elitism)
    logger.info("Genetic attack stopped after %d generations and %d queries, best score %.6f", generations,
                evaluator.queries, evaluator.best_score)

    return evaluator.result(generations)


def _select(genomes: np.ndarray, scores: np.ndarray, count: int) -> Tuple[np.ndarray, np.ndarray]:
    best = np.argsort(scores, kind="stable")[:count]
    return genomes[best], scores[best]


def _breed(survivors: np.ndarray, config: AttackConfig, rng: np.random.Generator) -> np.ndarray:
    children = np.empty((config.population, survivors.shape[1]))
    for index in range(config.population):
        first, second = survivors[rng.integers(0, len(survivors), size=2)]
        if rng.random() < config.crossover_prob:
            child = np.where(rng.random(len(first)) < 0.5, first, second)
        else:
            child = first.copy()
        mutated = rng.random(len(child)) < config.mutation_prob
        child = child + mutated * rng.normal(0.0, config.mutation_sigma, len(child))
        children[index] = np.clip(child, 0.0, 1.0)
    return children

# -*- coding: utf-8 -*-
"""
Module for the generic attack loop: candidate evaluation under the budget
and equivalence constraints, and the optimizers plugged into it
"""
import abc
import logging
from dataclasses import dataclass
from typing import (
    Callable,
    List,
    Optional,
    Sequence
)

import numpy as np

from .config import AttackConfig
from .exceptions import (
    BudgetZeroWithInsertions,
    FeasibilityViolation,
    InfeasiblePlan,
    QueryBudgetExhausted
)
from .result import (
    AttackResult,
    TraceStep
)
from ..budget import (
    EditCost,
    output_cost,
    within_budget
)
from ..detector import (
    Detector,
    DetectorScore
)
from ..manipulation import (
    EditablePlan,
    Manipulation,
    ManipulationError,
    PerturbationVector,
    canonical_order,
    compose
)
from ..oracle import check_equivalence
from ..pe import (
    PeFile,
    serialize
)

logger = logging.getLogger(__name__)

Objective = Callable[[DetectorScore], float]


def malice(score: DetectorScore) -> float:
    """
    Default objective, the attacks minimize the score of the detector
    """
    return score.malice


@dataclass
class _Best:
    output: bytes
    score: float
    value: float
    cost: EditCost
    plan: Optional[EditablePlan]
    evaded: bool


class CandidateEvaluator:
    """
    Scores candidates for one attack.

    Every candidate is checked against the budget and the equivalence oracle
    before the detector sees it, the best one and the trace are kept.

    :param bytes original: Content of the file under attack
    :param Detector detector: Detector to evade
    :param AttackConfig config: Attack hyperparameters
    :param objective: Value to minimize, computed from the score
    """

    def __init__(self, original: bytes, detector: Detector, config: AttackConfig, objective: Objective = malice):
        self.original = bytes(original)
        self.detector = detector
        self.config = config
        self.objective = objective
        self.queries = 0
        self.initial_score: Optional[float] = None
        self.trace: List[TraceStep] = []
        self._best: Optional[_Best] = None
        self._lowest: Optional[float] = None
        self._step_best: Optional[float] = None

    @property
    def exhausted(self) -> bool:
        return self.queries >= self.config.max_queries

    @property
    def evaded(self) -> bool:
        return self._best is not None and self._best.evaded

    @property
    def best_score(self) -> float:
        return self._best.score

    def evaluate(self, output: bytes, plan: Optional[EditablePlan], penalty: float = 0.0) -> DetectorScore:
        """
        :param bytes output: Candidate file
        :param plan: Plan the candidate was rendered from, None for the original file
        :param float penalty: Added to the objective
        :return: Score of the candidate
        :rtype: DetectorScore
        :raise FeasibilityViolation: The candidate is over the budget or not equivalent
        :raise QueryBudgetExhausted: No query left
        """
        cost = EditCost() if plan is None else output_cost(plan, output, self.original)
        if not within_budget(cost, self.config.epsilon):
            raise FeasibilityViolation(f"Candidate costs {cost.total} bytes, budget is {self.config.epsilon}")
        if plan is not None:
            report = check_equivalence(self.original, output, plan.kinds)
            if not report.equivalent:
                raise FeasibilityViolation(f"Candidate is not equivalent to the original: {report}")
        if self.exhausted:
            raise QueryBudgetExhausted(f"All {self.config.max_queries} queries are used")

        score = self.detector.score(output)
        self.queries += 1
        if self.initial_score is None:
            self.initial_score = score.malice
        value = self.objective(score) + penalty
        evaded = score.malice < self.config.threshold
        if self._step_best is None or score.malice < self._step_best:
            self._step_best = score.malice
        if self._lowest is None or score.malice < self._lowest:
            self._lowest = score.malice
        if self._best is None or (not self._best.evaded, self._best.value) > (not evaded, value):
            self._best = _Best(bytes(output), score.malice, value, cost, plan, evaded)
        logger.debug("Candidate %d scored %.6f at cost %d", self.queries, score.malice, cost.total)

        return score

    def record(self, step_index: int) -> None:
        """
        Close a step of the trace, its best_score is the lowest score seen so far
        even when a penalty made another candidate the best one
        """
        best = self._best
        score = self._step_best if self._step_best is not None else self._lowest
        self.trace.append(TraceStep(step_index, self.queries, score, self._lowest, best.cost.total))
        self._step_best = None

    def result(self, iterations: int) -> AttackResult:
        best = self._best
        return AttackResult(success=best.evaded, best_bytes=best.output, best_score=best.score,
                            initial_score=self.initial_score, queries_used=self.queries,
                            iterations_used=iterations, cost=best.cost, trace=tuple(self.trace), plan=best.plan)


class LoopState:
    """
    Current candidate of a fixed plan attack.

    ``content`` holds the perturbation bytes, ``substitutable`` flags the
    perturbation positions that existed in the original file, only changes
    there cost budget.
    """

    def __init__(self, plan: EditablePlan, evaluator: CandidateEvaluator, rng: np.random.Generator):
        self.plan = plan
        self.evaluator = evaluator
        self.rng = rng
        self.positions = plan.editable_positions()
        self.baseline = np.frombuffer(plan.initial(), dtype=np.uint8).copy()
        self.content = self.baseline.copy()
        self.substitutable = ~plan.inserted_mask()[self.positions]
        self.base_cost = plan.structural_insertions + len(plan.structural_substitutions)
        self.score: Optional[float] = None

    @property
    def allowance(self) -> int:
        """
        :return: Substitutions the budget allows on top of the manipulation cost
        :rtype: int
        """
        return self.evaluator.config.epsilon - self.base_cost

    def substitutions(self, content: np.ndarray) -> int:
        return int(np.count_nonzero((content != self.baseline) & self.substitutable))

    def render(self, content: np.ndarray) -> bytes:
        return self.plan.render(PerturbationVector(content.astype(np.uint8).tobytes()))

    def try_content(self, content: np.ndarray) -> bool:
        """
        Score the content and keep it when it lowers the score

        :return: The content was kept
        :rtype: bool
        """
        score = self.evaluator.evaluate(self.render(content), self.plan).malice
        if score < self.score:
            self.content = content.copy()
            self.score = score
            return True
        return False


class Optimizer(metaclass=abc.ABCMeta):
    """
    Base class for the optimizers driving attack_loop
    """
    name = "optimizer"

    def prepare(self, state: LoopState) -> None:
        """
        Check the plan before the first query
        """

    @abc.abstractmethod
    def step(self, state: LoopState) -> None:
        """
        Run one iteration, every candidate goes through state.evaluator
        """


class RandomSearch(Optimizer):
    """
    Baseline optimizer: rewrite a random subset of the perturbation with
    random bytes and keep it when the score decreases

    :param float rate: Share of the perturbation rewritten per iteration
    """
    name = "random"

    def __init__(self, rate: float = 0.05):
        self.rate = rate

    def step(self, state: LoopState) -> None:
        size = len(state.content)
        if not size:
            return
        count = max(1, int(round(self.rate * size)))
        chosen = state.rng.choice(size, size=min(count, size), replace=False)
        candidate = state.content.copy()
        candidate[chosen] = state.rng.integers(0, 256, size=len(chosen), dtype=np.uint8)

        overdraft = state.substitutions(candidate) - state.allowance
        if overdraft > 0:
            fresh = ((candidate[chosen] != state.baseline[chosen])
                     & (state.content[chosen] == state.baseline[chosen]))
            changed = chosen[fresh & state.substitutable[chosen]]
            candidate[changed[:overdraft]] = state.content[changed[:overdraft]]
        if np.array_equal(candidate, state.content):
            return
        state.try_content(candidate)


def feasible_plan(pe: PeFile, manipulations: Sequence[Manipulation], config: AttackConfig) -> EditablePlan:
    """
    :return: Plan of the manipulations in canonical order
    :rtype: EditablePlan
    :raise InfeasiblePlan: The manipulations can't be applied
    :raise BudgetZeroWithInsertions: The budget doesn't cover the manipulations themselves
    """
    try:
        result = compose(pe, canonical_order(manipulations))
    except ManipulationError as error:
        raise InfeasiblePlan(f"Manipulations can't be applied: {error}") from error

    structural = result.structural_insertions + len(result.structural_substitutions)
    if structural > config.epsilon:
        raise BudgetZeroWithInsertions(f"Manipulations edit {structural} bytes by themselves, budget is "
                                       f"{config.epsilon}")
    return result


def attack_loop(pe: PeFile, manipulations: Sequence[Manipulation], detector: Detector,
                objective: Objective = malice, config: AttackConfig = None,
                optimizer: Optimizer = None) -> AttackResult:
    """
    Minimize the objective over the perturbations of the composition

    Step 0 of the trace scores the unchanged perturbation, every following
    step is one optimizer iteration. The loop stops after max_iterations,
    on evasion or when the queries run out.

    :param PeFile pe: File under attack
    :param manipulations: Composition, in any order
    :param Detector detector: Detector to evade
    :param objective: Value to minimize, computed from the score
    :param AttackConfig config: Attack hyperparameters
    :param Optimizer optimizer: Proposes the candidates, random search by default
    :return: Best candidate and trace
    :rtype: AttackResult
    :raise InfeasiblePlan: The manipulations can't be applied
    :raise BudgetZeroWithInsertions: The budget doesn't cover the manipulations themselves
    """
    config = config if config is not None else AttackConfig()
    optimizer = optimizer if optimizer is not None else RandomSearch()
    original = serialize(pe)
    plan = feasible_plan(pe, manipulations, config)
    evaluator = CandidateEvaluator(original, detector, config, objective)
    state = LoopState(plan, evaluator, np.random.default_rng(config.seed))
    optimizer.prepare(state)

    state.score = evaluator.evaluate(state.render(state.content), plan).malice
    evaluator.record(0)
    iterations = 0
    while iterations < config.max_iterations and not evaluator.evaded and not evaluator.exhausted:
        iterations += 1
        try:
            optimizer.step(state)
        except QueryBudgetExhausted:
            evaluator.record(iterations)
            break
        evaluator.record(iterations)
    logger.info("%s attack stopped after %d iterations and %d queries, best score %.6f", optimizer.name,
                iterations, evaluator.queries, evaluator.best_score)

    return evaluator.result(iterations)

# -*- coding: utf-8 -*-
"""
Module for the outcome of an attack
"""
from dataclasses import dataclass
from typing import (
    Optional,
    Tuple
)

from ..budget import EditCost
from ..manipulation import EditablePlan


@dataclass(frozen=True)
class TraceStep:
    """
    State of the attack after one iteration or generation.

    ``score`` is the lowest score of the step, ``best_score`` the lowest
    score seen up to and including it.
    """
    step_index: int
    queries: int
    score: float
    best_score: float
    payload_bytes: int


@dataclass(frozen=True)
class AttackResult:
    success: bool
    best_bytes: bytes
    best_score: float
    initial_score: float
    queries_used: int
    iterations_used: int
    cost: EditCost
    trace: Tuple[TraceStep, ...] = ()
    plan: Optional[EditablePlan] = None

    @property
    def payload_size(self) -> int:
        return self.cost.total

    @property
    def manipulations(self) -> tuple:
        return self.plan.manipulations if self.plan is not None else ()

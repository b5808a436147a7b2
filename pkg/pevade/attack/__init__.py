# -*- coding: utf-8 -*-
"""
Optimizers looking for adversarial files under a byte budget
"""
from .config import AttackConfig
from .exceptions import (
    AttackError,
    BudgetZeroWithInsertions,
    EmptyDonorPool,
    FeasibilityViolation,
    InfeasiblePlan,
    NoBenignFiles,
    OracleMismatch,
    QueryBudgetExhausted
)
from .gamma import (
    Donor,
    DonorPool,
    GammaVariant,
    gamma_attack,
    harvest,
    harvest_donors
)
from .gradient import (
    IterativeGradient,
    best_replacement,
    iterative_byte_gradient,
    single_gradient_step
)
from .loop import (
    CandidateEvaluator,
    LoopState,
    Optimizer,
    RandomSearch,
    attack_loop,
    feasible_plan,
    malice
)
from .result import (
    AttackResult,
    TraceStep
)
from .sanity import (
    LinearScorer,
    additive_sanity_attack,
    projected_gradient_ascent
)
from .transfer import (
    TransferRow,
    transfer_evaluate
)

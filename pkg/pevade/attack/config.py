# -*- coding: utf-8 -*-
"""
Module for the attack hyperparameters
"""
from typing import (
    Any,
    Dict
)

from ..validators import (
    FloatValidator,
    IntValidator,
    ProbabilityValidator,
    ValidationError
)


class AttackConfig:
    """
    Hyperparameters shared by the optimizers.

    :param int epsilon: Budget of edited bytes
    :param int max_iterations: Iterations of the gradient attacks
    :param int max_queries: Detector queries allowed to one attack
    :param int population: Genomes per generation of the genetic attack
    :param int elitism: Genomes surviving a generation
    :param float crossover_prob: Probability of crossing two parents
    :param float mutation_prob: Probability of mutating a gene
    :param float mutation_sigma: Spread of a gene mutation
    :param float payload_penalty: Penalty per payload byte added to the score
    :param float threshold: Evasion happens below this score
    :param int seed: Seed of every random choice
    """
    epsilon = IntValidator(min_value=0)
    max_iterations = IntValidator(min_value=0)
    max_queries = IntValidator(min_value=0)
    population = IntValidator(min_value=2)
    elitism = IntValidator(min_value=1)
    crossover_prob = ProbabilityValidator()
    mutation_prob = ProbabilityValidator()
    mutation_sigma = FloatValidator(min_value=0.0)
    payload_penalty = FloatValidator(min_value=0.0)
    threshold = ProbabilityValidator()
    seed = IntValidator(min_value=0)

    def __init__(self, epsilon: int = 4096, max_iterations: int = 50, max_queries: int = 500, population: int = 20,
                 elitism: int = 5, crossover_prob: float = 0.5, mutation_prob: float = 0.1,
                 mutation_sigma: float = 0.2, payload_penalty: float = 1e-6, threshold: float = 0.5,
                 seed: int = 0):
        self.epsilon = epsilon
        self.max_iterations = max_iterations
        self.max_queries = max_queries
        self.population = population
        self.elitism = elitism
        self.crossover_prob = crossover_prob
        self.mutation_prob = mutation_prob
        self.mutation_sigma = mutation_sigma
        self.payload_penalty = payload_penalty
        self.threshold = threshold
        self.seed = seed
        self.validate()

    def validate(self) -> None:
        """
        :raise ValidationError: Survivors are not fewer than the population
        """
        if self.elitism >= self.population:
            raise ValidationError(f"elitism ({self.elitism}) must be smaller than the population "
                                  f"({self.population})")

    def as_dict(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in ("epsilon", "max_iterations", "max_queries", "population",
                                                       "elitism", "crossover_prob", "mutation_prob",
                                                       "mutation_sigma", "payload_penalty", "threshold", "seed")}

    def replace(self, **changes) -> "AttackConfig":
        return AttackConfig(**{**self.as_dict(), **changes})

    def __repr__(self) -> str:
        return "AttackConfig(" + ", ".join(f"{name}={value!r}" for name, value in self.as_dict().items()) + ")"

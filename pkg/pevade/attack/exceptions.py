# -*- coding: utf-8 -*-
"""
Exceptions raised by the attack optimizers
"""


class AttackError(Exception):
    """
    Base exception for all attack errors
    """


class InfeasiblePlan(AttackError):
    """
    The manipulations can't be applied to the file or leave nothing to optimize
    """


class BudgetZeroWithInsertions(AttackError):
    """
    The budget is smaller than the bytes the manipulations insert or rewrite by themselves
    """


class EmptyDonorPool(AttackError):
    """
    The genetic attack got no donor content
    """


class NoBenignFiles(AttackError):
    """
    No benign file to harvest donor content from
    """


class FeasibilityViolation(AttackError):
    """
    A candidate is over the budget or not equivalent to the original
    """


class OracleMismatch(AttackError):
    """
    The closed form optimum and the generic optimizer disagree
    """


class QueryBudgetExhausted(AttackError):
    """
    Scoring another candidate would go over the query budget
    """

# -*- coding: utf-8 -*-
"""
Module for defining validators
"""
import math
import re
from abc import ABC, abstractmethod
from typing import Any


class ValidationError(Exception):
    """
    Exception for indicating that validation criteria are not met
    """


class Validator(ABC):
    """
    Validator class defining setters and getters
    """

    def __init__(self, valid_values: str = None):
        self.valid_values = valid_values
        self.name = None

    def __set_name__(self, owner, name):
        self.name = f"_{name}"

    def __get__(self, instance, instance_type=None):
        if instance is None:
            return self
        return getattr(instance, self.name)

    def __set__(self, instance, value):
        value = self.validate(value)
        setattr(instance, self.name, value)

    @abstractmethod
    def validate(self, value):
        """

        :param value: Evaluated value
        :return: Value converted to the validated type
        :raise ValidationError: Validation criteria not satisfied
        """


class IntValidator(Validator):
    """
    Class for validating if value is integer inside of the range
    """

    def __init__(self, min_value: int = None, max_value: int = None):
        self.max_value = max_value
        self.min_value = min_value
        super().__init__(None)

    def validate(self, value) -> int:
        if isinstance(value, bool) or not is_int(value):
            raise ValidationError(f"{self.name[1:]} must be integer, got {value!r}")
        value = int(value)
        if self.min_value is not None and value < self.min_value:
            raise ValidationError(f"{self.name[1:]} must be at least {self.min_value}, got {value}")
        if self.max_value is not None and value > self.max_value:
            raise ValidationError(f"{self.name[1:]} must be at most {self.max_value}, got {value}")
        return value


class FloatValidator(Validator):
    """
    Class for validating if value is a finite real number inside of the range
    """

    def __init__(self, min_value: float = None, max_value: float = None):
        self.max_value = max_value
        self.min_value = min_value
        super().__init__(None)

    def validate(self, value) -> float:
        try:
            value = float(value)
        except (TypeError, ValueError) as error:
            raise ValidationError(f"{self.name[1:]} must be a number, got {value!r}") from error
        if not math.isfinite(value):
            raise ValidationError(f"{self.name[1:]} must be finite")
        if self.min_value is not None and value < self.min_value:
            raise ValidationError(f"{self.name[1:]} must be at least {self.min_value}, got {value}")
        if self.max_value is not None and value > self.max_value:
            raise ValidationError(f"{self.name[1:]} must be at most {self.max_value}, got {value}")
        return value


class ProbabilityValidator(FloatValidator):
    """
    Class for validating if value is in [0, 1]
    """

    def __init__(self):
        super().__init__(0.0, 1.0)


class UrlValidator(Validator):
    """
    Class for validating URLs
    """

    def validate(self, value: str) -> str:
        regex = re.compile(
            r'^https?://'  # http:// or https://
            r'(?:(?:[A-Z0-9](?:[A-Z0-9-]{0,61}[A-Z0-9])?\.)+(?:[A-Z]{2,6}\.?'
            r'|[A-Z0-9-]{2,}\.?)|'  # domain...
            r'localhost|'  # localhost...
            r'\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3})'  # ...or ip
            r'(?::\d+)?'  # optional port
            r'(?:/?|[/?]\S+)$', re.IGNORECASE)
        if re.match(regex, value) is None:
            raise ValidationError(f"Invalid value for the URL: {value}")
        return value


def is_int(value: Any) -> bool:
    value = str(value).strip()
    if value and value[0] in ('-', '+'):
        return value[1:].isdigit()
    return value.isdigit()

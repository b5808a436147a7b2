# -*- coding: utf-8 -*-
"""
Module for handling campaign configuration files.

One setting per line, ``section.key = value``. Lines starting with ``#``
and blank lines are ignored.
"""
import os
from typing import (
    Any,
    Dict,
    Tuple
)

import colander

from .command.helper import helper_methods
from .constants import (
    MAX_DEPTH,
    MAX_TREES
)
from .enums import Optimizer


class ConfigError(Exception):
    """
    The configuration file can't be read or holds invalid settings
    """


def _choice(*values):
    return colander.OneOf(values)


def _node(schema_type, default, validator=None, name=None):
    return colander.SchemaNode(schema_type, missing=default, validator=validator,
                               **({"name": name} if name else {}))


class _Section(colander.MappingSchema):
    def schema_type(self, **kw):  # pylint: disable=unused-argument
        return colander.Mapping(unknown="raise")


class CorpusSchema(_Section):
    benign_dir = _node(colander.String(allow_empty=True), "")
    malicious_dir = _node(colander.String(allow_empty=True), "")
    manifest = _node(colander.String(allow_empty=True), "")


class DetectorSchema(_Section):
    kind = _node(colander.String(), "end_to_end", _choice("end_to_end", "feature", "external"))
    model = _node(colander.String(allow_empty=True), "")
    transport = _node(colander.String(), "subprocess", _choice("subprocess", "http"))
    command = _node(colander.String(allow_empty=True), "")
    url = _node(colander.String(allow_empty=True), "")
    timeout_ms = _node(colander.Int(), 10000, colander.Range(min=1))
    threshold = _node(colander.Float(), 0.5, colander.Range(0.0, 1.0))


class TrainSchema(_Section):
    kind = _node(colander.String(), "end_to_end", _choice("end_to_end", "feature"))
    epochs = _node(colander.Int(), 20, colander.Range(min=0))
    learning_rate = _node(colander.Float(), None, colander.Range(min=0.0))
    batch_size = _node(colander.Int(), 32, colander.Range(min=1))
    input_length = _node(colander.Int(), 65536, colander.Range(min=1))
    n_trees = _node(colander.Int(), MAX_TREES, colander.Range(min=0, max=MAX_TREES))
    depth = _node(colander.Int(), MAX_DEPTH, colander.Range(min=1, max=MAX_DEPTH))
    subsample = _node(colander.Float(), 1.0, colander.Range(0.0, 1.0))
    out = _node(colander.String(allow_empty=True), "")


class AttackSchema(_Section):
    optimizer = _node(colander.String(), Optimizer.ITERATIVE_GRADIENT.value,
                      _choice(*(optimizer.value for optimizer in Optimizer)))
    manipulations = _node(colander.String(), "extend:4096")
    epsilon = _node(colander.Int(), 4096, colander.Range(min=0))
    max_iterations = _node(colander.Int(), 50, colander.Range(min=0))
    max_queries = _node(colander.Int(), 500, colander.Range(min=0))
    population = _node(colander.Int(), 20, colander.Range(min=2))
    elitism = _node(colander.Int(), 5, colander.Range(min=1))
    crossover_prob = _node(colander.Float(), 0.5, colander.Range(0.0, 1.0))
    mutation_prob = _node(colander.Float(), 0.1, colander.Range(0.0, 1.0))
    mutation_sigma = _node(colander.Float(), 0.2, colander.Range(min=0.0))
    payload_penalty = _node(colander.Float(), 1e-6, colander.Range(min=0.0), name="lambda")
    threshold = _node(colander.Float(), 0.5, colander.Range(0.0, 1.0))
    donors_dir = _node(colander.String(allow_empty=True), "")
    max_donors = _node(colander.Int(), 32, colander.Range(min=1))
    donor_slice = _node(colander.Int(), 4096, colander.Range(min=1))
    gamma_manipulation = _node(colander.String(), "section", _choice("section", "padding"))
    limit = _node(colander.Int(), 0, colander.Range(min=0))


class OutputSchema(_Section):
    dir = _node(colander.String(), "pevade-output")


class RunSchema(_Section):
    seed = _node(colander.Int(), 0, colander.Range(min=0))
    jobs = _node(colander.Int(), 1, colander.Range(min=1))


class ConfigurationSchema(_Section):
    corpus = CorpusSchema()
    detector = DetectorSchema()
    train = TrainSchema()
    attack = AttackSchema()
    output = OutputSchema()
    run = RunSchema()


_PATH_KEYS = (("corpus", "benign_dir"), ("corpus", "malicious_dir"), ("corpus", "manifest"),
              ("attack", "donors_dir"))


def get_default_configuration() -> Dict:
    """
    Returns default configuration to be used

    :return: Default configuration
    :rtype: dict
    """
    return read_configuration("", "<defaults>")


def parse_lines(text: str, source: str = "<config>") -> Tuple[Dict[str, Dict[str, str]], Dict[str, int]]:
    """
    Split a configuration file into sections

    :param str text: Content of the file
    :param str source: Name used in error messages
    :return: Raw values per section and key, line number of every section.key
    :raise ConfigError: A line is not ``section.key = value`` or repeats a key
    """
    values: Dict[str, Dict[str, str]] = {}
    lines: Dict[str, int] = {}
    schema = ConfigurationSchema()
    for number, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, separator, value = line.partition("=")
        section, dot, key = name.strip().partition(".")
        if not separator or not dot or not section or not key:
            raise ConfigError(f"{source}:{number}: expected section.key = value, got {line!r}")
        section_schema = schema.get(section)
        if section_schema is None or section_schema.get(key) is None:
            raise ConfigError(f"{source}:{number}: unknown setting {section}.{key}")
        if f"{section}.{key}" in lines:
            raise ConfigError(f"{source}:{number}: {section}.{key} is already set on line "
                              f"{lines[section + '.' + key]}")
        values.setdefault(section, {})[key] = value.strip()
        lines[f"{section}.{key}"] = number

    return values, lines


def read_configuration(text: str, source: str = "<config>", overrides: Dict[str, Any] = None) -> Dict:
    """
    Validate a configuration file and fill in the defaults

    :param str text: Content of the file
    :param str source: Name used in error messages
    :param overrides: Values replacing the file ones, already typed
    :return: Configuration with every section and key
    :rtype: dict
    :raise ConfigError: Invalid setting
    """
    values, lines = parse_lines(text, source)
    schema = ConfigurationSchema()
    for section in schema.children:
        values.setdefault(section.name, {})
    try:
        config = schema.deserialize(values)
    except colander.Invalid as error:
        messages = []
        for path, message in sorted(error.asdict().items()):
            line = lines.get(path)
            messages.append(f"{source}:{line}: {path}: {message}" if line else f"{source}: {path}: {message}")
        raise ConfigError("\n".join(messages)) from error

    config = helper_methods.deep_update(config, overrides or {})
    for section, key in _PATH_KEYS:
        path = config[section][key]
        if path and not os.path.exists(path):
            raise ConfigError(f"{source}: {section}.{key} refers to {path}, which doesn't exist")

    return config


def load_configuration(path: str = None, overrides: Dict[str, Any] = None) -> Dict:
    """
    :param str path: Configuration file, defaults only when None
    :param overrides: Values replacing the file ones, already typed
    :return: Validated configuration
    :rtype: dict
    :raise ConfigError: The file can't be read or holds invalid settings
    """
    if path is None:
        return read_configuration("", "<defaults>", overrides)
    try:
        with open(path, encoding="utf-8") as file:
            text = file.read()
    except OSError as error:
        raise ConfigError(f"Can't read configuration file {path}: {error}") from error

    return read_configuration(text, path, overrides)

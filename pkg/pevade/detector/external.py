# -*- coding: utf-8 -*-
"""
Module for detectors running outside of the process: a command line scorer
or an HTTP scoring service
"""
import abc
import logging
import os
import shlex
import subprocess
import tempfile
import threading

import requests

from .detector import (
    DEFAULT_THRESHOLD,
    Detector
)
from .exceptions import (
    ExternalProtocol,
    ExternalTimeout,
    ExternalUnreachable
)
from ..validators import (
    UrlValidator,
    ValidationError
)

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT_MS = 10000


def parse_score(text: str) -> float:
    """
    :param str text: Reply of the external detector
    :return: Score in [0, 1]
    :rtype: float
    :raise ExternalProtocol: The reply is not a decimal in [0, 1]
    """
    try:
        score = float(text)
    except (TypeError, ValueError) as error:
        raise ExternalProtocol(f"Expected a score, got {text!r}") from error
    if not 0.0 <= score <= 1.0:
        raise ExternalProtocol(f"Score {score} is outside of [0, 1]")
    return score


class Transport(metaclass=abc.ABCMeta):
    """
    Abstract base class for the ways of reaching an external detector
    """

    @abc.abstractmethod
    def query(self, data: bytes, timeout: float) -> float:
        """
        :param bytes data: Content of the file to score
        :param float timeout: Seconds to wait for the reply
        :return: Score in [0, 1]
        :rtype: float
        """

    @property
    @abc.abstractmethod
    def description(self) -> str:
        """
        :return: Short description of the endpoint
        :rtype: str
        """


class SubprocessTransport(Transport):
    """
    Runs the command with the path of the file to score as its last argument.

    The command writes one decimal followed by a new line to standard output
    and exits with 0.
    """

    def __init__(self, command: str):
        self.arguments = shlex.split(command)
        if not self.arguments:
            raise ValueError("Detector command is empty")

    @property
    def description(self) -> str:
        return "cmd:" + shlex.join(self.arguments)

    def query(self, data: bytes, timeout: float) -> float:
        descriptor, path = tempfile.mkstemp(prefix="pevade-", suffix=".bin")
        try:
            with os.fdopen(descriptor, "wb") as file:
                file.write(data)
            result = subprocess.run(self.arguments + [path], capture_output=True, timeout=timeout, check=False)
        except subprocess.TimeoutExpired as error:
            raise ExternalTimeout(f"{self.description} didn't answer in {timeout} s") from error
        except OSError as error:
            raise ExternalUnreachable(f"Can't run {self.description}: {error}") from error
        finally:
            if os.path.exists(path):
                os.remove(path)

        if result.returncode:
            raise ExternalProtocol(f"{self.description} exited with {result.returncode}: "
                                   f"{result.stderr.decode(errors='replace').strip()}")
        lines = result.stdout.decode(errors="replace").splitlines()
        return parse_score(lines[0].strip() if lines else "")


class HttpTransport(Transport):
    """
    Posts the file as application/octet-stream, the service replies with the
    JSON object {"score": <decimal>}
    """
    url = UrlValidator()

    def __init__(self, url: str):
        self.url = url

    @property
    def description(self) -> str:
        return self.url

    def query(self, data: bytes, timeout: float) -> float:
        try:
            response = requests.post(self.url, data=data, timeout=timeout,
                                     headers={"Content-Type": "application/octet-stream"})
        except requests.exceptions.Timeout as error:
            raise ExternalTimeout(f"{self.url} didn't answer in {timeout} s") from error
        except requests.exceptions.RequestException as error:
            raise ExternalUnreachable(f"Can't reach {self.url}: {error}") from error

        if response.status_code != 200:
            raise ExternalProtocol(f"{self.url} answered with status {response.status_code}")
        try:
            reply = response.json()
        except ValueError as error:
            raise ExternalProtocol(f"{self.url} didn't answer with JSON") from error
        if not isinstance(reply, dict) or "score" not in reply or isinstance(reply["score"], bool):
            raise ExternalProtocol(f"{self.url} answered without a score")

        return parse_score(reply["score"])


class ExternalDetector(Detector):
    """
    Detector scoring files through a transport, one call at a time

    :param Transport transport: Way of reaching the detector
    :param int timeout_ms: Milliseconds to wait for every reply
    :param float threshold: Lowest score labeled as malicious
    """
    name = "external"

    def __init__(self, transport: Transport, timeout_ms: int = DEFAULT_TIMEOUT_MS,
                 threshold: float = DEFAULT_THRESHOLD):
        super().__init__(threshold)
        self.transport = transport
        self.timeout_ms = timeout_ms
        self._lock = threading.Lock()

    @classmethod
    def from_target(cls, target: str, timeout_ms: int = DEFAULT_TIMEOUT_MS,
                    threshold: float = DEFAULT_THRESHOLD) -> "ExternalDetector":
        """
        :param str target: http(s) URL or cmd:<command line>
        :return: Detector reaching the target
        :rtype: ExternalDetector
        :raise ValueError: The target is neither
        """
        if target.startswith("cmd:"):
            return cls(SubprocessTransport(target[len("cmd:"):]), timeout_ms, threshold)
        try:
            return cls(HttpTransport(target), timeout_ms, threshold)
        except ValidationError as error:
            raise ValueError(f"Target {target!r} is neither a URL nor cmd:<command line>") from error

    def __str__(self) -> str:
        return self.transport.description

    def malice(self, data: bytes) -> float:
        with self._lock:
            score = self.transport.query(data, self.timeout_ms / 1000)
        logger.debug("%s scored %d bytes: %f", self.transport.description, len(data), score)
        return score

"""
Module providing the display helpers of the commands
"""
from typing import (
    Iterable,
    Sequence
)

from tabulate import tabulate


def print_warning(text):
    if text:
        print()
        print(tabulate([[str(text).upper()]], tablefmt="rst"))
        print()


def print_error(text):
    print(f"Error: {text}")


def print_table(rows: Iterable[Sequence], headers: Sequence[str] = (), title: str = "") -> None:
    if title:
        print(f"\n{title}")
    print(tabulate(list(rows), headers=list(headers), tablefmt="simple", floatfmt=".6f"))

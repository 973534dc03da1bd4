# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

from abc import ABC, abstractmethod
from typing import Any, Iterable, TextIO

from .record import OutputRecord

SIGNIFICANT_DIGITS = 12


def format_number(value: float) -> str:
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


class Writer(ABC):

    def __init__(self, stream: TextIO):
        self._stream = stream

    @abstractmethod
    def write_records(self, records: Iterable[OutputRecord]) -> None:
        """
        Writes operating-point rows in the given order
        :param records: the rows
        :return: None
        """
        ...

    @abstractmethod
    def write_document(self, document: Any) -> None:
        """
        Writes a structured report (dicts, lists, numbers, strings)
        :param document: the report
        :return: None
        """
        ...

# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import csv
from typing import Any, Iterable

from .abstract import Writer, format_number
from .json import JsonWriter
from .record import OutputRecord


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format_number(value)
    return str(value)


class CsvWriter(Writer):
    """
    Plot-tool friendly CSV: header always present, numbers with 12 significant digits
    """

    def write_records(self, records: Iterable[OutputRecord]) -> None:
        writer = csv.writer(self._stream, lineterminator="\n")
        writer.writerow(OutputRecord.header())
        for record in records:
            writer.writerow([format_cell(v) for v in record.values()])

    def write_document(self, document: Any) -> None:
        # structured reports have no tabular form
        JsonWriter(self._stream).write_document(document)

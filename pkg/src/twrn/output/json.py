# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import json
import math
from enum import Enum
from typing import Any, Iterable

from .abstract import Writer, format_number
from .record import OutputRecord


def to_jsonable(value: Any) -> Any:
    """
    Converts a report into plain JSON types; non-finite floats become null
    """
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, (str, int)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(format_number(value))
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if hasattr(value, "item"):
        # numpy scalars
        return to_jsonable(value.item())
    raise TypeError(f"Cannot serialise {type(value).__name__} to JSON")


class JsonWriter(Writer):

    def write_records(self, records: Iterable[OutputRecord]) -> None:
        rows = [dict(zip(OutputRecord.header(), r.values())) for r in records]
        self.write_document(rows)

    def write_document(self, document: Any) -> None:
        json.dump(to_jsonable(document), self._stream, indent=2, sort_keys=False)
        self._stream.write("\n")

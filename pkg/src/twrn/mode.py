# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

from enum import Enum
from typing import Tuple, Type, Union


class Mode(Enum):
    AF = "af"
    DF = "df"

    @classmethod
    def from_str(cls, text: str) -> "Mode":
        mapping = {
            "AF": cls.AF,
            "DF": cls.DF,
        }
        key = text.strip().upper()
        if key not in mapping:
            raise ValueError(f"Unsupported relay mode: {text!r}")
        return mapping[key]

    @property
    def states(self) -> Type["State"]:
        return {
            Mode.AF: AfState,
            Mode.DF: DfState,
        }[self]


class AfState(Enum):
    """
    AF protocol states. SB is the uplink slot, S0..S3 the broadcast slot labelled by
    which cascade links succeeded (S0 both in outage, S3 both delivered).
    """
    SB = 0
    S0 = 1
    S1 = 2
    S2 = 3
    S3 = 4

    @property
    def label(self) -> str:
        return "S_b" if self is AfState.SB else self.name


class DfState(Enum):
    """
    DF relay buffer states: S0 empty, S1 holds x1 awaiting x2, S2 holds x2 awaiting x1,
    S3 holds both and broadcasts
    """
    S0 = 0
    S1 = 1
    S2 = 2
    S3 = 3

    @property
    def label(self) -> str:
        return self.name


State = Union[AfState, DfState]


def state_labels(mode: Mode) -> Tuple[str, ...]:
    return tuple(s.label for s in mode.states)

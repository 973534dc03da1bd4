# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float

    def within(self, target: float, sigmas: float) -> bool:
        """
        True if target lies within the given number of standard errors of the estimate
        """
        if not math.isfinite(self.stderr):
            return False
        if self.stderr == 0:
            return math.isclose(self.value, target, rel_tol=1e-12, abs_tol=1e-15)
        return abs(self.value - target) <= sigmas * self.stderr


def ratio_estimate(numerators: Sequence[float], denominators: Sequence[float]) -> Estimate:
    """
    Ratio-of-sums estimate with a batch-means standard error (delta method)
    :param numerators: per-batch numerator totals
    :param denominators: per-batch denominator totals
    :return: the estimate; stderr is nan with fewer than two batches
    """
    num = np.asarray(numerators, dtype=float)
    den = np.asarray(denominators, dtype=float)
    total_den = den.sum()
    if total_den == 0:
        return Estimate(math.inf if num.sum() > 0 else math.nan, math.nan)
    ratio = float(num.sum() / total_den)
    n = len(num)
    if n < 2:
        return Estimate(ratio, math.nan)
    resid = num - ratio * den
    stderr = math.sqrt(float(np.sum(resid ** 2)) / (n * (n - 1))) / float(den.mean())
    return Estimate(ratio, stderr)


@dataclass(frozen=True)
class Tally:
    """
    Raw counters of one stretch of simulated slots. Tallies add up component-wise.
    """
    slots: int
    rounds: int
    bits_t1_to_t2: int
    bits_t2_to_t1: int
    transmissions: Tuple[int, int, int]
    occupancy: Tuple[int, ...]
    link_attempts: Tuple[int, ...]
    link_outages: Tuple[int, ...]
    broadcast_outcomes: Tuple[int, int, int, int]

    def __add__(self, other: "Tally") -> "Tally":
        if len(self.occupancy) != len(other.occupancy):
            raise ValueError("Cannot add tallies of different relay modes")
        return Tally(
            slots=self.slots + other.slots,
            rounds=self.rounds + other.rounds,
            bits_t1_to_t2=self.bits_t1_to_t2 + other.bits_t1_to_t2,
            bits_t2_to_t1=self.bits_t2_to_t1 + other.bits_t2_to_t1,
            transmissions=_add(self.transmissions, other.transmissions),
            occupancy=_add(self.occupancy, other.occupancy),
            link_attempts=_add(self.link_attempts, other.link_attempts),
            link_outages=_add(self.link_outages, other.link_outages),
            broadcast_outcomes=_add(self.broadcast_outcomes, other.broadcast_outcomes),
        )

    @property
    def bits(self) -> int:
        return self.bits_t1_to_t2 + self.bits_t2_to_t1

    def energy(self, quanta: Sequence[float]) -> float:
        """
        :param quanta: energy of one slot on air for T1, T2 and the relay
        :return: total transmitted energy
        """
        return sum(n * q for n, q in zip(self.transmissions, quanta))


def _add(a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))

# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .channel import AfOutagePair, DfOutageProfile
from .errors import DegenerateChainError, LabelMismatchError
from .mode import AfState, DfState, Mode, state_labels

ROW_SUM_TOL = 1e-12
RESIDUAL_TOL = 1e-10
PAPER_SUM_TOL = 1e-10
# rounding budget, in ulps, for the closed-form sum once D has lost digits
PAPER_SUM_ULPS = 1e3
PAPER_DENOMINATOR_TOL = 1e-12


class Source(Enum):
    CHAIN = "chain-solved"
    PAPER = "paper-closed-form"


class TransitionMatrix:
    """
    Row-stochastic per-slot transition matrix. Indexed by the states of a relay
    mode, or by plain positional labels when no mode is given.
    """

    def __init__(self, matrix: np.ndarray, mode: Optional[Mode] = None):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
            raise ValueError(f"Expected a non-empty square matrix, got shape {matrix.shape}")
        if mode is not None and matrix.shape[0] != len(mode.states):
            raise ValueError(f"Expected a {len(mode.states)}x{len(mode.states)} matrix for {mode.name}")
        if np.any(matrix < 0) or np.any(matrix > 1):
            raise ValueError("Transition probabilities must lie in [0, 1]")
        if np.any(np.abs(matrix.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise ValueError(f"Rows must sum to 1, got {matrix.sum(axis=1)}")
        matrix.setflags(write=False)
        self._mode = mode
        self._matrix = matrix

    @property
    def mode(self) -> Optional[Mode]:
        return self._mode

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def labels(self) -> Tuple[str, ...]:
        if self._mode is None:
            return tuple(str(i) for i in range(self._matrix.shape[0]))
        return tuple(s.label for s in self._mode.states)

    @property
    def name(self) -> str:
        return self._mode.name if self._mode is not None else "Markov"

    def __getitem__(self, item: Tuple[Enum, Enum]) -> float:
        src, dst = item
        return float(self._matrix[src.value, dst.value])


@dataclass(frozen=True)
class StationaryDistribution:
    labels: Tuple[str, ...]
    probabilities: Tuple[float, ...]
    residual: float
    source: Source
    mode: Optional[Mode] = None

    def __getitem__(self, state: Enum) -> float:
        return self.probabilities[state.value]

    def as_dict(self) -> Dict[str, float]:
        return dict(zip(self.labels, self.probabilities))


@dataclass(frozen=True)
class StationaryComparison:
    labels: Tuple[str, ...]
    per_state: Tuple[float, ...]
    linf: float
    aggregates: Dict[str, float]

    @property
    def aggregate_linf(self) -> float:
        return max((abs(v) for v in self.aggregates.values()), default=0.0)

    def to_dict(self) -> Dict[str, object]:
        return {
            "per_state": dict(zip(self.labels, self.per_state)),
            "linf": self.linf,
            "aggregates": dict(self.aggregates),
            "aggregate_linf": self.aggregate_linf,
        }


def build_af_chain(outage: AfOutagePair) -> TransitionMatrix:
    """
    AF chain: the uplink slot S_b branches on the joint outage outcome of the
    broadcast, every broadcast state returns to S_b
    """
    p12, p21 = outage.p12, outage.p21
    m = np.zeros((5, 5))
    m[AfState.SB.value, AfState.S0.value] = p12 * p21
    m[AfState.SB.value, AfState.S1.value] = p21 * (1 - p12)
    m[AfState.SB.value, AfState.S2.value] = p12 * (1 - p21)
    m[AfState.SB.value, AfState.S3.value] = (1 - p12) * (1 - p21)
    for s in (AfState.S0, AfState.S1, AfState.S2, AfState.S3):
        m[s.value, AfState.SB.value] = 1.0
    return TransitionMatrix(m, Mode.AF)


def build_df_chain(outage: DfOutageProfile) -> TransitionMatrix:
    """
    Sequential DF chain following the relay protocol slot by slot: poll T1 from S0,
    poll T2 from S1, poll T1 from S2, broadcast from S3
    """
    p1r, p2r = outage.p1r, outage.p2r
    s0, s1, s2, s3 = (s.value for s in DfState)
    m = np.zeros((4, 4))
    m[s0, s1] = 1 - p1r
    m[s0, s0] = p1r
    m[s1, s3] = 1 - p2r
    m[s1, s1] = p2r
    m[s2, s3] = 1 - p1r
    m[s2, s2] = p1r
    m[s3, s0], m[s3, s1], m[s3, s2], m[s3, s3] = outage.broadcast_exits
    return TransitionMatrix(m, Mode.DF)


def stationary(chain: TransitionMatrix) -> StationaryDistribution:
    """
    Solves pi P = pi with sum(pi) = 1 by a dense direct solve, the last balance
    equation replaced by the normalisation
    :param chain: transition matrix
    :return: the chain-solved stationary distribution
    """
    p = chain.matrix
    n = p.shape[0]
    absorbing = [label for label, i in zip(chain.labels, range(n)) if p[i, i] == 1.0]
    if absorbing and n > 1:
        raise DegenerateChainError(
            f"{chain.name} chain has absorbing state(s) {', '.join(absorbing)}", absorbing
        )
    system = p.T - np.eye(n)
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = linalg.solve(system, rhs)
    except (linalg.LinAlgError, ValueError) as e:
        raise DegenerateChainError(f"{chain.name} chain balance equations are singular: {e}") from e
    pi = np.where(np.abs(pi) < 1e-15, 0.0, pi)
    residual = float(np.max(np.abs(pi @ p - pi)))
    if np.any(pi < -1e-12) or residual > RESIDUAL_TOL:
        raise DegenerateChainError(
            f"{chain.name} chain has no unique stationary distribution (residual {residual:.3g})"
        )
    pi = np.clip(pi, 0.0, None)
    pi = pi / pi.sum()
    return StationaryDistribution(chain.labels, tuple(float(v) for v in pi), residual, Source.CHAIN, chain.mode)


def _denominator_terms(outage: DfOutageProfile) -> Tuple[float, ...]:
    p1r, p2r, pr1, pr2 = outage.p1r, outage.p2r, outage.pr1, outage.pr2
    return 3.0, -2 * p1r, -2 * p2r, -pr1, -pr2, pr1 * p2r, p1r * pr2, p1r * p2r


def df_paper_denominator(outage: DfOutageProfile) -> float:
    return sum(_denominator_terms(outage))


def paper_sum_tolerance(outage: DfOutageProfile) -> float:
    """
    How far the closed-form probabilities may sum from 1 through rounding alone.
    Grows as D cancels towards 0 at high outage.
    """
    terms = _denominator_terms(outage)
    d = abs(sum(terms))
    magnitude = sum(abs(t) for t in terms)
    return max(PAPER_SUM_TOL, PAPER_SUM_ULPS * np.finfo(float).eps * magnitude / d)


def df_stationary_paper(outage: DfOutageProfile) -> StationaryDistribution:
    """
    Published closed form of the DF buffer-state probabilities, evaluated verbatim
    """
    p1r, p2r, pr1, pr2 = outage.p1r, outage.p2r, outage.pr1, outage.pr2
    d = df_paper_denominator(outage)
    if abs(d) < PAPER_DENOMINATOR_TOL:
        raise DegenerateChainError(
            f"closed-form denominator vanishes (D={d:.3g}) for p1r={p1r}, p2r={p2r}, pr1={pr1}, pr2={pr2}"
        )
    pi = (
        (1 - p2r) * (1 - pr1) * (1 - pr2) / d,
        (1 - p1r) * (1 - pr2) / d,
        (1 - p2r) * (1 - pr1) * pr2 / d,
        (1 - p1r) * (1 - p2r) / d,
    )
    total = sum(pi)
    if abs(total - 1.0) > paper_sum_tolerance(outage):
        raise DegenerateChainError(
            f"closed-form probabilities sum to {total} (D={d:.3g}), beyond rounding error"
        )
    residual = float(np.max(np.abs(np.array(pi) @ build_df_chain(outage).matrix - np.array(pi))))
    return StationaryDistribution(state_labels(Mode.DF), pi, residual, Source.PAPER, Mode.DF)


def compare_stationary(a: StationaryDistribution, b: StationaryDistribution) -> StationaryComparison:
    """
    Differences a - b per state, plus the aggregates that survive a relabelling of
    the two single-codeword DF states
    """
    if a.labels != b.labels:
        raise LabelMismatchError(f"Cannot compare distributions over {a.labels} and {b.labels}")
    diff = tuple(x - y for x, y in zip(a.probabilities, b.probabilities))
    if a.mode is Mode.DF:
        aggregates = {
            "S0": diff[DfState.S0.value],
            "S1+S2": diff[DfState.S1.value] + diff[DfState.S2.value],
            "S3": diff[DfState.S3.value],
        }
    elif a.mode is Mode.AF:
        aggregates = {"S_b": diff[AfState.SB.value]}
    else:
        aggregates = {}
    return StationaryComparison(a.labels, diff, max(abs(d) for d in diff), aggregates)


def flow_imbalance(pi: StationaryDistribution, chain: TransitionMatrix,
                   states: Optional[Sequence[Enum]] = None) -> Dict[str, float]:
    """
    Outflow minus inflow for each state under pi, ignoring self-loops
    """
    p = chain.matrix
    v = np.array(pi.probabilities)
    states = list(states) if states is not None else list(chain.mode.states)
    res = {}
    for s in states:
        i = s.value
        outflow = v[i] * (1.0 - p[i, i])
        inflow = sum(v[j] * p[j, i] for j in range(len(v)) if j != i)
        res[s.label] = float(outflow - inflow)
    return res

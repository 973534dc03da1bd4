# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .config import NetworkConfig
from .errors import NoFeasibleRateError
from .metrics import PerformancePoint, evaluate_point
from .mode import Mode
from .numerics import golden_section_max
from .simulator import SimResult, run_replications

logger = logging.getLogger(__name__)

DEFAULT_RATE_MIN = 0.05
DEFAULT_RATE_MAX = 12.0
DEFAULT_STEPS = 200
DEFAULT_TOL = 1e-6
DEFAULT_MC_SIZE = 100_000


class MetricSource(Enum):
    ANALYTIC = "analytic"
    MC = "mc"

    @classmethod
    def from_str(cls, text: str) -> "MetricSource":
        mapping = {
            "analytic": cls.ANALYTIC,
            "mc": cls.MC,
            "monte-carlo": cls.MC,
        }
        if text.lower() not in mapping:
            raise ValueError(f"Unsupported metric source: {text!r}")
        return mapping[text.lower()]


class EbVariant(Enum):
    PAPER = "paper"
    RENEWAL = "renewal"

    @classmethod
    def from_str(cls, text: str) -> "EbVariant":
        mapping = {
            "paper": cls.PAPER,
            "renewal": cls.RENEWAL,
        }
        if text.lower() not in mapping:
            raise ValueError(f"Unsupported bit-energy variant: {text!r}")
        return mapping[text.lower()]


class Objective(Enum):
    MAX_GOODPUT = "max-goodput"
    MIN_EB = "min-eb"

    @classmethod
    def from_str(cls, text: str) -> "Objective":
        mapping = {
            "max-goodput": cls.MAX_GOODPUT,
            "min-eb": cls.MIN_EB,
        }
        if text.lower() not in mapping:
            raise ValueError(f"Unsupported objective: {text!r}")
        return mapping[text.lower()]

    @property
    def maximize(self) -> bool:
        return self is Objective.MAX_GOODPUT


@dataclass(frozen=True)
class SweepSpec:
    mode: Mode
    rate_min: float = DEFAULT_RATE_MIN
    rate_max: float = DEFAULT_RATE_MAX
    steps: int = DEFAULT_STEPS
    snr_db: Tuple[Optional[float], ...] = (10.0,)
    source: MetricSource = MetricSource.ANALYTIC
    eb_variant: EbVariant = EbVariant.RENEWAL
    tol: float = DEFAULT_TOL
    log_spaced: bool = True
    rates: Optional[Tuple[float, ...]] = None
    mc_size: int = DEFAULT_MC_SIZE
    mc_reps: int = 1
    workers: int = 1
    paper_units: bool = False

    def __post_init__(self):
        if self.rates is None:
            if not self.rate_min > 0:
                raise ValueError(f"rate_min must be > 0, got {self.rate_min}")
            if not self.rate_max > self.rate_min:
                raise ValueError(f"rate_max must exceed rate_min, got [{self.rate_min}, {self.rate_max}]")
            if self.steps < 2:
                raise ValueError(f"steps must be >= 2, got {self.steps}")
        elif not self.rates or any(r <= 0 for r in self.rates):
            raise ValueError(f"Explicit rates must be a non-empty list of positive values, got {self.rates}")
        if not self.snr_db:
            raise ValueError("At least one SNR value is needed")
        if self.tol <= 0:
            raise ValueError(f"tol must be > 0, got {self.tol}")

    @property
    def grid(self) -> Tuple[float, ...]:
        if self.rates is not None:
            return tuple(self.rates)
        if self.log_spaced:
            values = np.geomspace(self.rate_min, self.rate_max, self.steps)
        else:
            values = np.linspace(self.rate_min, self.rate_max, self.steps)
        return tuple(float(v) for v in values)


@dataclass(frozen=True)
class SweepRow:
    """
    One evaluated grid point: the analytic point, and the simulation when requested
    """
    snr_db: float
    point: PerformancePoint
    sim: Optional[SimResult] = None

    @property
    def source(self) -> MetricSource:
        return MetricSource.ANALYTIC if self.sim is None else MetricSource.MC

    def goodput(self) -> float:
        return self.point.goodput if self.sim is None else self.sim.empirical_goodput.value

    def eb(self, variant: EbVariant) -> float:
        if self.sim is not None:
            return self.sim.empirical_eb.value
        return self.point.eb(renewal=variant is EbVariant.RENEWAL)


@dataclass(frozen=True)
class OptimalRateReport:
    rate: float
    value: float
    objective: Objective
    bracket: Tuple[float, float]
    grid: Tuple[Tuple[float, float], ...]
    mode: Mode
    snr_db: float
    crossing_rate: Optional[float] = None
    notes: Tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "snr_db": self.snr_db,
            "objective": self.objective.value,
            "rate": self.rate,
            "value": self.value,
            "bracket": list(self.bracket),
            "crossing_rate": self.crossing_rate,
            "grid": [{"rate": r, "value": v} for r, v in self.grid],
            "notes": list(self.notes),
        }


def evaluate_row(cfg: NetworkConfig, spec: SweepSpec, snr_db: Optional[float], rate: float,
                 pool: Optional[Executor] = None) -> SweepRow:
    """
    :param snr_db: per-node SNR to reset the powers from, or None to keep the configured powers
    :param pool: shared replication pool for Monte Carlo rows
    """
    point_cfg = cfg if snr_db is None else cfg.with_snr_db(snr_db)
    point = evaluate_point(point_cfg, spec.mode, rate, spec.paper_units)
    sim = None
    if spec.source is MetricSource.MC:
        # common random numbers: every grid point reuses the configured seed
        sim = run_replications(point_cfg, spec.mode, rate, spec.mc_size, spec.mc_reps, cfg.seed, spec.workers,
                               paper_units=spec.paper_units, pool=pool)
    return SweepRow(point_cfg.snr_db[0] if snr_db is None else snr_db, point, sim)


def sweep(cfg: NetworkConfig, spec: SweepSpec, pool: Optional[Executor] = None) -> List[SweepRow]:
    """
    Evaluates every (snr, rate) pair, snr-major and rate-minor
    :param cfg: base configuration; powers are reset from each SNR
    :param spec: sweep specification
    :return: the rows in deterministic order
    """
    return [evaluate_row(cfg, spec, snr, rate, pool) for snr in spec.snr_db for rate in spec.grid]


def _objective_value(row: SweepRow, objective: Objective, variant: EbVariant) -> float:
    return row.goodput() if objective is Objective.MAX_GOODPUT else row.eb(variant)


def refine_on_grid(
    fn: Callable[[float], float],
    grid: Sequence[float],
    values: Sequence[float],
    maximize: bool,
    tol: float,
) -> Tuple[float, float, Tuple[float, float]]:
    """
    Takes the best finite grid sample and refines it with a golden-section search
    between its grid neighbours. The refined point is kept only if it does at least
    as well as the grid sample.
    :return: (x*, f(x*), bracket)
    """
    sign = 1.0 if maximize else -1.0
    scored = [sign * v if math.isfinite(v) else -math.inf for v in values]
    if all(s == -math.inf for s in scored):
        raise NoFeasibleRateError("objective is not finite anywhere on the rate grid")
    best = int(np.argmax(scored))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, len(grid) - 1)]
    x_best, v_best = grid[best], values[best]
    if hi > lo:
        def signed(x: float) -> float:
            v = fn(x)
            return sign * v if math.isfinite(v) else -math.inf

        x, sv = golden_section_max(signed, lo, hi, tol)
        if sv >= sign * v_best:
            x_best, v_best = x, sign * sv
    return x_best, v_best, (lo, hi)


def optimal_rate(
    cfg: NetworkConfig,
    spec: SweepSpec,
    objective: Objective,
    snr_db: Optional[float] = None,
    pool: Optional[Executor] = None,
) -> OptimalRateReport:
    """
    Locates the rate maximising goodput or minimising bit energy: dense grid scan,
    then golden-section refinement inside the best point's neighbours
    :param snr_db: SNR to optimise at (defaults to spec.snr_db[0])
    :return: the report, echoing the full grid
    """
    snr = spec.snr_db[0] if snr_db is None else snr_db
    grid = spec.grid
    rows = [evaluate_row(cfg, spec, snr, r, pool) for r in grid]
    values = [_objective_value(row, objective, spec.eb_variant) for row in rows]

    def fn(rate: float) -> float:
        return _objective_value(evaluate_row(cfg, spec, snr, rate, pool), objective, spec.eb_variant)

    x, v, bracket = refine_on_grid(fn, grid, values, objective.maximize, spec.tol)
    logger.info("%s %s at %g dB: R*=%g, value=%g", spec.mode.name, objective.value, rows[0].snr_db, x, v)
    return OptimalRateReport(
        rate=x,
        value=v,
        objective=objective,
        bracket=bracket,
        grid=tuple(zip(grid, values)),
        mode=spec.mode,
        snr_db=rows[0].snr_db,
    )


def _goodput_gap(cfg: NetworkConfig, rate: float, paper_units: bool = False) -> float:
    return evaluate_point(cfg, Mode.DF, rate, paper_units).goodput - evaluate_point(cfg, Mode.AF, rate, paper_units).goodput


def crossing_rate(
    cfg: NetworkConfig,
    snr_db: Optional[float],
    rate_min: float = DEFAULT_RATE_MIN,
    rate_max: float = DEFAULT_RATE_MAX,
    steps: int = DEFAULT_STEPS,
    tol: float = DEFAULT_TOL,
) -> Optional[float]:
    """
    Smallest rate at which DF goodput overtakes AF goodput
    :return: the crossing rate, or None when the sign of eta_DF - eta_AF never changes
    """
    point_cfg = cfg if snr_db is None else cfg.with_snr_db(snr_db)
    grid = np.geomspace(rate_min, rate_max, steps)
    prev_rate, prev_gap = None, 0.0
    for rate in grid:
        rate = float(rate)
        gap = _goodput_gap(point_cfg, rate)
        if gap == 0.0:
            # both modes deliver nothing, or a tie: no sign information
            continue
        if prev_rate is not None and (gap > 0) != (prev_gap > 0):
            return float(optimize.bisect(lambda r: _goodput_gap(point_cfg, r), prev_rate, rate, xtol=tol))
        prev_rate, prev_gap = rate, gap
    logger.info("no AF/DF goodput crossing in [%g, %g] at %s dB", rate_min, rate_max, snr_db)
    return None

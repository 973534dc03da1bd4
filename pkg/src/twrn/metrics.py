# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

from .channel import AfOutagePair, DfOutageProfile, af_outage_pair, df_outage_profile
from .config import NetworkConfig, derive_params
from .errors import DegenerateChainError, InfiniteEnergyError, UndefinedRateError
from .markov import (
    StationaryDistribution,
    build_df_chain,
    df_paper_denominator,
    df_stationary_paper,
    stationary,
)
from .mode import DfState, Mode

logger = logging.getLogger(__name__)

OutageProfile = Union[AfOutagePair, DfOutageProfile]


@dataclass(frozen=True)
class PerformancePoint:
    """
    Analytic performance of one (mode, SNR, rate) operating point. Energies are in
    joules per bit, or in normalised units when the bandwidth division is disabled.
    """
    mode: Mode
    rate: float
    goodput: float
    normalized_rate: float
    eb_paper: float
    eb_renewal: float
    outage: OutageProfile
    goodput_paper: Optional[float] = None

    def eb(self, renewal: bool = True) -> float:
        return self.eb_renewal if renewal else self.eb_paper


def _bandwidth(cfg: NetworkConfig, paper_units: bool) -> float:
    return 1.0 if paper_units else cfg.bandwidth_hz


def goodput_af(rate: float, p: AfOutagePair) -> float:
    return rate * (2.0 - p.p12 - p.p21) / 2.0


def eb_af(cfg: NetworkConfig, rate: float, p: AfOutagePair, paper_units: bool = False) -> float:
    """
    Average energy per delivered bit in AF: one round costs (P1+P2+Pr) L/(R B) and
    delivers (2 - p12 - p21) L bits on average
    """
    if rate <= 0:
        raise UndefinedRateError(f"Bit energy needs a rate > 0, got {rate}")
    delivered = 2.0 - p.p12 - p.p21
    if delivered <= 0:
        raise InfiniteEnergyError("both AF cascade links are always in outage")
    return (cfg.p1 + cfg.p2 + cfg.pr) / (delivered * rate * _bandwidth(cfg, paper_units))


def goodput_df(rate: float, p: DfOutageProfile, pi: StationaryDistribution) -> float:
    """
    DF goodput: only broadcast slots deliver, 2 - pr1 - pr2 codewords on average
    """
    return pi[DfState.S3] * rate * (2.0 - p.pr1 - p.pr2)


def goodput_df_closed_form(rate: float, p: DfOutageProfile) -> float:
    """
    Final published expression for the DF goodput, with the broadcast outages in the numerator
    """
    d = df_paper_denominator(p)
    if d == 0:
        raise DegenerateChainError("closed-form denominator vanishes")
    return rate * (2.0 - p.pr1 - p.pr2) * (1 - p.p1r) * (1 - p.p2r) / d


def stage_energy_df(
    cfg: NetworkConfig, rate: float, p: DfOutageProfile, paper_units: bool = False,
) -> Tuple[float, float, float, float]:
    """
    Expected polling energy needed to refill the relay buffer, conditioned on the
    state the broadcast left behind. Polling is geometric in the uplink outage.
    :return: (E_S0, E_S1, E_S2, E_S3)
    """
    if rate <= 0:
        raise UndefinedRateError(f"Bit energy needs a rate > 0, got {rate}")
    if p.p1r >= 1 or p.p2r >= 1:
        raise InfiniteEnergyError(f"uplink never succeeds (p1r={p.p1r}, p2r={p.p2r})")
    slot = cfg.codeword_bits / (rate * _bandwidth(cfg, paper_units))
    e1 = cfg.p1 * slot / (1 - p.p1r)
    e2 = cfg.p2 * slot / (1 - p.p2r)
    return e1 + e2, e2, e1, 0.0


def _df_eb(cfg: NetworkConfig, rate: float, p: DfOutageProfile, weights, paper_units: bool) -> float:
    delivered = 2.0 - p.pr1 - p.pr2
    if delivered <= 0:
        raise InfiniteEnergyError("the broadcast never reaches either terminal")
    stages = stage_energy_df(cfg, rate, p, paper_units)
    broadcast = cfg.pr * cfg.codeword_bits / (rate * _bandwidth(cfg, paper_units))
    polling = sum(w * e for w, e in zip(weights, stages))
    return (polling + broadcast) / (delivered * cfg.codeword_bits)


def eb_df_paper(
    cfg: NetworkConfig, rate: float, p: DfOutageProfile, pi_paper: StationaryDistribution,
    paper_units: bool = False,
) -> float:
    """
    Published DF bit energy: stage energies weighted by the slot-stationary buffer probabilities
    """
    return _df_eb(cfg, rate, p, pi_paper.probabilities, paper_units)


def eb_df_renewal(cfg: NetworkConfig, rate: float, p: DfOutageProfile, paper_units: bool = False) -> float:
    """
    Exact long-run DF bit energy. Broadcasts split time into i.i.d. cycles, so the
    stage energies are weighted by where the broadcast sends the chain.
    """
    return _df_eb(cfg, rate, p, p.broadcast_exits, paper_units)


def normalized_rate(goodput: float, rate: float) -> float:
    if rate <= 0:
        raise UndefinedRateError(f"Normalized rate is undefined at rate {rate}")
    return goodput / rate


def _safe(fn, *args) -> float:
    try:
        return fn(*args)
    except (InfiniteEnergyError, DegenerateChainError):
        return math.inf


def evaluate_point(
    cfg: NetworkConfig, mode: Mode, rate: float, paper_units: bool = False,
) -> PerformancePoint:
    """
    Analytic evaluation of one operating point. Energies that diverge are reported
    as inf; a DF chain trapped in outage delivers nothing.
    :param cfg: network configuration
    :param mode: relay mode
    :param rate: transmission rate, > 0
    :param paper_units: drop the bandwidth from the energy expressions
    :return: the performance point
    """
    if rate <= 0:
        raise UndefinedRateError(f"Operating points need a rate > 0, got {rate}")
    params = derive_params(cfg)
    if mode is Mode.AF:
        p = af_outage_pair(cfg, params, rate)
        eta = goodput_af(rate, p)
        eb = _safe(eb_af, cfg, rate, p, paper_units)
        return PerformancePoint(mode, rate, eta, normalized_rate(eta, rate), eb, eb, p)

    p = df_outage_profile(cfg, params, rate)
    try:
        eta = goodput_df(rate, p, stationary(build_df_chain(p)))
    except DegenerateChainError as e:
        logger.debug("DF chain at R=%g is degenerate (%s); goodput taken as 0", rate, e)
        eta = 0.0
    try:
        pi_paper = df_stationary_paper(p)
        eta_paper = goodput_df(rate, p, pi_paper)
        eb_paper = _safe(eb_df_paper, cfg, rate, p, pi_paper, paper_units)
    except DegenerateChainError:
        eta_paper, eb_paper = 0.0, math.inf
    eb_renewal = _safe(eb_df_renewal, cfg, rate, p, paper_units)
    return PerformancePoint(mode, rate, eta, normalized_rate(eta, rate), eb_paper, eb_renewal, p, eta_paper)

# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import special

from .config import DerivedParams, NetworkConfig
from .numerics import DEFAULT_REL_TOL, integrate_semi_infinite


@dataclass(frozen=True)
class ChannelDraw:
    """
    Instantaneous power gains |h|^2 of the four links for one fading block
    """
    g1r: float
    g2r: float
    gr1: float
    gr2: float

    def __post_init__(self):
        for name in ("g1r", "g2r", "gr1", "gr2"):
            if getattr(self, name) < 0:
                raise ValueError(f"Channel gain {name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class AfOutagePair:
    p12: float
    p21: float

    def __post_init__(self):
        _check_probabilities(self)


@dataclass(frozen=True)
class DfOutageProfile:
    """
    Link outages: T1->relay, T2->relay, relay->T1, relay->T2
    """
    p1r: float
    p2r: float
    pr1: float
    pr2: float

    def __post_init__(self):
        _check_probabilities(self)

    @property
    def is_symmetric(self) -> bool:
        return self.p1r == self.p2r and self.pr1 == self.pr2

    @property
    def broadcast_exits(self) -> Tuple[float, float, float, float]:
        """
        Probabilities of leaving the broadcast state towards S0, S1, S2, S3
        """
        return (
            (1 - self.pr1) * (1 - self.pr2),
            (1 - self.pr1) * self.pr2,
            self.pr1 * (1 - self.pr2),
            self.pr1 * self.pr2,
        )


def _check_probabilities(obj) -> None:
    for name, value in vars(obj).items():
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"Outage probability {name} must lie in [0, 1], got {value}")


def sample_gains(params: DerivedParams, rng: np.random.Generator, size: int) -> np.ndarray:
    """
    Draws `size` blocks of independent exponential gains
    :return: array of shape (size, 4), columns g1r, g2r, gr1, gr2
    """
    means = np.array([params.sigma1_sq, params.sigma2_sq, params.sigma1_sq, params.sigma2_sq])
    return rng.standard_exponential((size, 4)) * means


def sample_channel_draw(params: DerivedParams, rng: np.random.Generator) -> ChannelDraw:
    g1r, g2r, gr1, gr2 = sample_gains(params, rng, 1)[0]
    return ChannelDraw(float(g1r), float(g2r), float(gr1), float(gr2))


def af_rates(gains: np.ndarray, cfg: NetworkConfig, params: DerivedParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cascade rates T1->T2 and T2->T1 for an array of gain rows (g1r, g2r, gr1, gr2)
    """
    g1r, g2r, gr1, gr2 = (gains[..., i] for i in range(4))
    b2 = params.beta_sq
    r12 = np.log2(1.0 + b2 * gr2 * g1r * cfg.p1 / ((1.0 + b2 * gr2) * cfg.noise_power))
    r21 = np.log2(1.0 + b2 * gr1 * g2r * cfg.p2 / ((1.0 + b2 * gr1) * cfg.noise_power))
    return r12, r21


def af_instantaneous_rates(draw: ChannelDraw, cfg: NetworkConfig, params: DerivedParams) -> Tuple[float, float]:
    r12, r21 = af_rates(np.array([draw.g1r, draw.g2r, draw.gr1, draw.gr2]), cfg, params)
    return float(r12), float(r21)


def df_rates(gains: np.ndarray, cfg: NetworkConfig) -> np.ndarray:
    """
    Link rates for DF: uplinks at full power, broadcast with half the relay power per stream
    :return: array of the same shape as gains, columns r1r, r2r, rr1, rr2
    """
    powers = np.array([cfg.p1, cfg.p2, cfg.pr / 2.0, cfg.pr / 2.0])
    return np.log2(1.0 + gains * powers / cfg.noise_power)


def cascade_cdf(x: float, a: float, mu1: float, mu2: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """
    CDF of X = Y1 Y2 / (a + Y2) with Y1, Y2 independent exponentials of means mu1, mu2
    :param x: threshold >= 0
    :param a: offset >= 0 (1 / beta^2 for the AF cascade)
    :return: P(X <= x), clamped to [0, 1]
    """
    _check_cascade_args(x, a, mu1, mu2)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0

    def integrand(z: float) -> float:
        return math.exp(-x * (a + z) / (mu1 * z) - z / mu2)

    peak = math.sqrt(x * a * mu2 / mu1)
    result = integrate_semi_infinite(integrand, rel_tol=rel_tol, split_at=peak)
    return min(1.0, max(0.0, 1.0 - result.value / mu2))


def cascade_cdf_bessel(x: float, a: float, mu1: float, mu2: float) -> float:
    """
    Closed form of the cascade CDF through the modified Bessel function K1:
    F(x) = 1 - (2/mu2) sqrt(x a mu2 / mu1) K1(2 sqrt(x a / (mu1 mu2))) exp(-x / mu1)
    """
    _check_cascade_args(x, a, mu1, mu2)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if a == 0.0:
        return -math.expm1(-x / mu1)
    s = 2.0 * math.sqrt(x * a / (mu1 * mu2))
    # k1e(s) = K1(s) e^s keeps the product finite for large s
    tail = (2.0 / mu2) * math.sqrt(x * a * mu2 / mu1) * special.k1e(s) * math.exp(-x / mu1 - s)
    return min(1.0, max(0.0, 1.0 - tail))


def _check_cascade_args(x: float, a: float, mu1: float, mu2: float) -> None:
    if not x >= 0:
        raise ValueError(f"Threshold x must be >= 0, got {x}")
    if not (a >= 0 and math.isfinite(a)):
        raise ValueError(f"Offset a must be finite and >= 0, got {a}")
    if not (mu1 > 0 and mu2 > 0):
        raise ValueError(f"Means must be > 0, got mu1={mu1}, mu2={mu2}")


def _check_rate(rate: float) -> None:
    if not rate >= 0:
        raise ValueError(f"Transmission rate must be >= 0, got {rate}")


def af_outage_pair(
    cfg: NetworkConfig,
    params: DerivedParams,
    rate: float,
    rel_tol: float = DEFAULT_REL_TOL,
) -> AfOutagePair:
    """
    Outage probabilities of the two AF cascade links at rate R
    :param rate: transmission rate in bits/sec/Hz
    :return: (p12, p21)
    """
    _check_rate(rate)
    if rate == 0:
        return AfOutagePair(0.0, 0.0)
    spectral = math.expm1(rate * math.log(2.0))
    a = 1.0 / params.beta_sq
    p12 = cascade_cdf(spectral * cfg.noise_power / cfg.p1, a, params.sigma1_sq, params.sigma2_sq, rel_tol)
    p21 = cascade_cdf(spectral * cfg.noise_power / cfg.p2, a, params.sigma2_sq, params.sigma1_sq, rel_tol)
    return AfOutagePair(p12, p21)


def df_outage_profile(cfg: NetworkConfig, params: DerivedParams, rate: float) -> DfOutageProfile:
    """
    Outage probabilities of the four DF links at rate R; the relay splits its power
    equally between the two streams of the combined codeword
    """
    _check_rate(rate)
    spectral = math.expm1(rate * math.log(2.0))

    def outage(mean_gain: float, power: float) -> float:
        return -math.expm1(-spectral * cfg.noise_power / (mean_gain * power))

    return DfOutageProfile(
        p1r=outage(params.sigma1_sq, cfg.p1),
        p2r=outage(params.sigma2_sq, cfg.p2),
        pr1=outage(params.sigma1_sq, cfg.pr / 2.0),
        pr2=outage(params.sigma2_sq, cfg.pr / 2.0),
    )

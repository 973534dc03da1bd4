import math

import numpy as np
import pytest

from src.twrn.channel import (
    AfOutagePair,
    ChannelDraw,
    DfOutageProfile,
    af_instantaneous_rates,
    af_outage_pair,
    af_rates,
    cascade_cdf,
    cascade_cdf_bessel,
    df_outage_profile,
    df_rates,
    sample_channel_draw,
    sample_gains,
)
from src.twrn.config import NetworkConfig, DerivedParams, derive_params

CASCADE_POINTS = [
    (0.3, 17.48, 8.69, 8.69),
    (1.0, 1.0, 1.0, 1.0),
    (0.05, 0.1, 2.0, 3.0),
    (2.0, 5.0, 0.5, 4.0),
    (1e-4, 17.48, 8.69, 8.69),
    (30.0, 17.48, 8.69, 8.69),
    (0.7, 1e-3, 1.0, 10.0),
    (5.0, 50.0, 20.0, 0.2),
]


@pytest.mark.parametrize("x, a, mu1, mu2", CASCADE_POINTS)
def test_cascade_cdf_matches_bessel_form(x: float, a: float, mu1: float, mu2: float):
    assert cascade_cdf(x, a, mu1, mu2) == pytest.approx(cascade_cdf_bessel(x, a, mu1, mu2), abs=1e-8)


@pytest.mark.parametrize("x, mu1, mu2", [
    (0.1, 1.0, 1.0),
    (2.0, 8.69, 3.0),
    (0.01, 0.5, 9.0),
])
def test_cascade_cdf_without_offset(x: float, mu1: float, mu2: float):
    expected = 1.0 - math.exp(-x / mu1)
    assert cascade_cdf(x, 0.0, mu1, mu2) == pytest.approx(expected, abs=1e-9)
    assert cascade_cdf_bessel(x, 0.0, mu1, mu2) == pytest.approx(expected, abs=1e-12)


# AF cascade at 10 dB per node: offset 1 / beta^2, equal mean gains
_REFERENCE = derive_params(NetworkConfig.default(10.0))
A_10DB = 1.0 / _REFERENCE.beta_sq
MU_10DB = _REFERENCE.sigma1_sq


@pytest.mark.parametrize("x, a, mu1, mu2", [
    (0.0115, A_10DB, MU_10DB, MU_10DB),
    (0.3, A_10DB, MU_10DB, MU_10DB),
    (3.0, A_10DB, MU_10DB, MU_10DB),
    (1.0, 1.0, 1.0, 1.0),
    (2.0, 5.0, 0.5, 4.0),
    (0.05, 0.1, 2.0, 3.0),
    (0.7, 1e-3, 1.0, 10.0),
    (5.0, 50.0, 20.0, 0.2),
    (10.0, 0.1, 3.0, 3.0),
    (0.5, 50.0, 1.0, 10.0),
])
def test_cascade_cdf_matches_sampling(x: float, a: float, mu1: float, mu2: float):
    rng = np.random.default_rng(7)
    chunk, chunks = 1_000_000, 10
    n = chunk * chunks
    hits = 0
    for _ in range(chunks):
        y1 = rng.exponential(mu1, chunk)
        y2 = rng.exponential(mu2, chunk)
        hits += int(np.count_nonzero(y1 * y2 / (a + y2) <= x))
    empirical = hits / n
    p = cascade_cdf(x, a, mu1, mu2)
    assert abs(empirical - p) < 4 * math.sqrt(p * (1 - p) / n) + 1e-6


def test_cascade_cdf_limits():
    assert cascade_cdf(0.0, 1.0, 1.0, 1.0) == 0.0
    assert cascade_cdf(math.inf, 1.0, 1.0, 1.0) == 1.0
    assert cascade_cdf_bessel(0.0, 1.0, 1.0, 1.0) == 0.0
    values = [cascade_cdf(x, 2.0, 1.0, 3.0) for x in (0.01, 0.1, 1.0, 10.0, 100.0)]
    assert values == sorted(values)
    assert all(0.0 <= v <= 1.0 for v in values)


@pytest.mark.parametrize("x, a, mu1, mu2", [
    (-1.0, 1.0, 1.0, 1.0),
    (1.0, -1.0, 1.0, 1.0),
    (1.0, 1.0, 0.0, 1.0),
    (1.0, 1.0, 1.0, -2.0),
])
def test_cascade_cdf_rejects_arguments(x: float, a: float, mu1: float, mu2: float):
    with pytest.raises(ValueError):
        cascade_cdf(x, a, mu1, mu2)


def test_af_outage_symmetric_setup(cfg: NetworkConfig, params: DerivedParams):
    p = af_outage_pair(cfg, params, 2.0)
    assert p.p12 == pytest.approx(p.p21, abs=1e-12)
    assert 0.0 < p.p12 < 1.0


def test_af_outage_zero_rate(cfg: NetworkConfig, params: DerivedParams):
    assert af_outage_pair(cfg, params, 0.0) == AfOutagePair(0.0, 0.0)


def test_af_outage_increases_with_rate(cfg: NetworkConfig, params: DerivedParams):
    outages = [af_outage_pair(cfg, params, r).p12 for r in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0)]
    assert outages == sorted(outages)


def test_outage_falls_with_power(cfg: NetworkConfig):
    af, df = [], []
    for snr_db in (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0):
        point_cfg = cfg.with_snr_db(snr_db)
        params = derive_params(point_cfg)
        pair = af_outage_pair(point_cfg, params, 2.0)
        profile = df_outage_profile(point_cfg, params, 2.0)
        af.append((pair.p12, pair.p21))
        df.append((profile.p1r, profile.p2r, profile.pr1, profile.pr2))
    for series in (af, df):
        for weaker, stronger in zip(series, series[1:]):
            assert all(s <= w + 1e-12 for w, s in zip(weaker, stronger))


def test_af_outage_asymmetric_setup(asymmetric_cfg: NetworkConfig):
    params = derive_params(asymmetric_cfg)
    p = af_outage_pair(asymmetric_cfg, params, 2.0)
    # both cascades cross the same two links in opposite order
    assert p.p12 != pytest.approx(p.p21, abs=1e-9)


@pytest.mark.parametrize("rate", [0.5, 2.0, 4.0])
def test_af_outage_matches_sampling(cfg: NetworkConfig, params: DerivedParams, rate: float):
    n = 1_000_000
    gains = sample_gains(params, np.random.default_rng(11), n)
    r12, r21 = af_rates(gains, cfg, params)
    p = af_outage_pair(cfg, params, rate)
    for rates, expected in ((r12, p.p12), (r21, p.p21)):
        empirical = float(np.mean(rates < rate))
        assert abs(empirical - expected) < 4 * math.sqrt(expected * (1 - expected) / n) + 1e-6


def test_df_outage_closed_form(cfg: NetworkConfig, params: DerivedParams):
    rate = 2.0
    p = df_outage_profile(cfg, params, rate)
    threshold = (2.0 ** rate - 1.0) * cfg.noise_power
    assert p.p1r == pytest.approx(1.0 - math.exp(-threshold / (params.sigma1_sq * cfg.p1)), rel=1e-12)
    assert p.pr2 == pytest.approx(1.0 - math.exp(-threshold / (params.sigma2_sq * cfg.pr / 2.0)), rel=1e-12)
    assert p.is_symmetric
    # half the relay power per broadcast stream
    assert p.pr1 > p.p1r


def test_df_outage_zero_rate(cfg: NetworkConfig, params: DerivedParams):
    assert df_outage_profile(cfg, params, 0.0) == DfOutageProfile(0.0, 0.0, 0.0, 0.0)


def test_df_outage_rejects_negative_rate(cfg: NetworkConfig, params: DerivedParams):
    with pytest.raises(ValueError):
        df_outage_profile(cfg, params, -1.0)
    with pytest.raises(ValueError):
        af_outage_pair(cfg, params, -1.0)


def test_broadcast_exits(asymmetric_profile: DfOutageProfile):
    exits = asymmetric_profile.broadcast_exits
    assert sum(exits) == pytest.approx(1.0)
    assert exits[3] == pytest.approx(asymmetric_profile.pr1 * asymmetric_profile.pr2)
    assert not asymmetric_profile.is_symmetric


@pytest.mark.parametrize("values", [
    (1.2, 0.1, 0.1, 0.1),
    (0.1, -0.1, 0.1, 0.1),
])
def test_outage_profile_validation(values):
    with pytest.raises(ValueError):
        DfOutageProfile(*values)


def test_channel_draw_validation():
    with pytest.raises(ValueError):
        ChannelDraw(1.0, -0.5, 1.0, 1.0)


def test_instantaneous_rates(cfg: NetworkConfig, params: DerivedParams):
    draw = ChannelDraw(g1r=2.0, g2r=0.5, gr1=1.5, gr2=3.0)
    snr = cfg.p1 / cfg.noise_power
    b2 = params.beta_sq
    r12, r21 = af_instantaneous_rates(draw, cfg, params)
    assert r12 == pytest.approx(math.log2(1 + snr * draw.g1r * b2 * draw.gr2 / (1 + b2 * draw.gr2)))
    assert r21 == pytest.approx(math.log2(1 + snr * draw.g2r * b2 * draw.gr1 / (1 + b2 * draw.gr1)))

    r1r, r2r, rr1, rr2 = df_rates(np.array([draw.g1r, draw.g2r, draw.gr1, draw.gr2]), cfg)
    assert r1r == pytest.approx(math.log2(1 + snr * draw.g1r))
    assert r2r == pytest.approx(math.log2(1 + snr * draw.g2r))
    assert rr1 == pytest.approx(math.log2(1 + snr / 2 * draw.gr1))
    assert rr2 == pytest.approx(math.log2(1 + snr / 2 * draw.gr2))


def test_sample_gains(params: DerivedParams):
    rng = np.random.default_rng(3)
    gains = sample_gains(params, rng, 200_000)
    assert gains.shape == (200_000, 4)
    assert np.all(gains >= 0)
    means = gains.mean(axis=0)
    expected = [params.sigma1_sq, params.sigma2_sq, params.sigma1_sq, params.sigma2_sq]
    assert means == pytest.approx(expected, rel=0.02)
    assert isinstance(sample_channel_draw(params, rng), ChannelDraw)


def test_df_rates_shape(cfg: NetworkConfig, params: DerivedParams):
    gains = sample_gains(params, np.random.default_rng(5), 10)
    assert df_rates(gains, cfg).shape == (10, 4)

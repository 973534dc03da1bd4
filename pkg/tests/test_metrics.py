import math

import numpy as np
import pytest

from src.twrn.channel import AfOutagePair, DfOutageProfile
from src.twrn.config import NetworkConfig
from src.twrn.errors import InfiniteEnergyError, UndefinedRateError
from src.twrn.markov import build_df_chain, df_stationary_paper, stationary
from src.twrn.metrics import (
    eb_af,
    eb_df_paper,
    eb_df_renewal,
    evaluate_point,
    goodput_af,
    goodput_df,
    goodput_df_closed_form,
    normalized_rate,
    stage_energy_df,
)
from src.twrn.mode import Mode

ZERO_OUTAGE = DfOutageProfile(0.0, 0.0, 0.0, 0.0)


def test_goodput_af(af_outage: AfOutagePair):
    assert goodput_af(2.0, af_outage) == pytest.approx(2.0 * (2.0 - 0.1 - 0.2) / 2.0)
    assert goodput_af(3.0, AfOutagePair(0.0, 0.0)) == 3.0
    assert goodput_af(3.0, AfOutagePair(1.0, 1.0)) == 0.0


def test_eb_af(cfg: NetworkConfig, af_outage: AfOutagePair):
    rate = 2.0
    expected = (cfg.p1 + cfg.p2 + cfg.pr) / ((2.0 - 0.3) * rate * cfg.bandwidth_hz)
    assert eb_af(cfg, rate, af_outage) == pytest.approx(expected)
    assert eb_af(cfg, rate, af_outage, paper_units=True) == pytest.approx(expected * cfg.bandwidth_hz)


def test_eb_af_failures(cfg: NetworkConfig):
    with pytest.raises(InfiniteEnergyError):
        eb_af(cfg, 1.0, AfOutagePair(1.0, 1.0))
    with pytest.raises(UndefinedRateError):
        eb_af(cfg, 0.0, AfOutagePair(0.1, 0.1))


@pytest.mark.parametrize("rate", [0.1, 0.5, 1.0, 2.0, 4.0, 8.0])
def test_af_energy_goodput_product(cfg: NetworkConfig, rate: float):
    point = evaluate_point(cfg, Mode.AF, rate)
    product = point.eb_renewal * point.goodput * cfg.bandwidth_hz
    assert math.isclose(product, (cfg.p1 + cfg.p2 + cfg.pr) / 2.0, rel_tol=1e-12)


def test_af_point_symmetry(cfg: NetworkConfig):
    point = evaluate_point(cfg, Mode.AF, 2.0)
    p = point.outage
    assert p.p12 == pytest.approx(p.p21, abs=1e-12)
    assert point.goodput == pytest.approx(2.0 * (2.0 - 2.0 * p.p12) / 2.0)
    assert point.eb_paper == point.eb_renewal
    assert point.eb() == point.eb_renewal


def test_goodput_df_variants_agree_for_symmetric_profile(symmetric_profile: DfOutageProfile):
    rate = 1.5
    from_chain = goodput_df(rate, symmetric_profile, stationary(build_df_chain(symmetric_profile)))
    assert from_chain == pytest.approx(goodput_df_closed_form(rate, symmetric_profile), rel=1e-12)


def test_closed_form_goodput_matches_closed_form_distribution(asymmetric_profile: DfOutageProfile):
    rate = 1.5
    from_paper = goodput_df(rate, asymmetric_profile, df_stationary_paper(asymmetric_profile))
    assert from_paper == pytest.approx(goodput_df_closed_form(rate, asymmetric_profile), rel=1e-12)


def test_df_zero_outage_limit(cfg: NetworkConfig):
    point = evaluate_point(cfg, Mode.DF, 0.001)
    assert point.normalized_rate == pytest.approx(2.0 / 3.0, rel=1e-3)


def test_af_zero_outage_limit(cfg: NetworkConfig):
    point = evaluate_point(cfg, Mode.AF, 0.001)
    assert point.normalized_rate == pytest.approx(1.0, rel=1e-3)


def test_high_snr_low_rate_ceilings(cfg: NetworkConfig):
    # AF needs two slots per exchange, DF three
    strong = cfg.with_snr_db(20.0)
    assert evaluate_point(strong, Mode.AF, 0.05).normalized_rate > 0.95
    assert abs(evaluate_point(strong, Mode.DF, 0.05).normalized_rate - 2.0 / 3.0) < 0.05


def test_df_zero_outage_energies(cfg: NetworkConfig):
    rate = 2.0
    pi_paper = df_stationary_paper(ZERO_OUTAGE)
    assert eb_df_paper(cfg, rate, ZERO_OUTAGE, pi_paper, paper_units=True) == pytest.approx(cfg.p1 / rate)
    assert eb_df_renewal(cfg, rate, ZERO_OUTAGE, paper_units=True) == pytest.approx(1.5 * cfg.p1 / rate)


def test_stage_energy_df(cfg: NetworkConfig, asymmetric_profile: DfOutageProfile):
    rate = 2.0
    slot = cfg.codeword_bits / (rate * cfg.bandwidth_hz)
    e1 = cfg.p1 * slot / (1 - asymmetric_profile.p1r)
    e2 = cfg.p2 * slot / (1 - asymmetric_profile.p2r)
    assert stage_energy_df(cfg, rate, asymmetric_profile) == pytest.approx((e1 + e2, e2, e1, 0.0))
    with pytest.raises(InfiniteEnergyError):
        stage_energy_df(cfg, rate, DfOutageProfile(1.0, 0.1, 0.1, 0.1))


def test_eb_df_renewal_formula(cfg: NetworkConfig, asymmetric_profile: DfOutageProfile):
    rate = 1.0
    p = asymmetric_profile
    stages = stage_energy_df(cfg, rate, p)
    broadcast = cfg.pr * cfg.codeword_bits / (rate * cfg.bandwidth_hz)
    polling = float(np.dot(p.broadcast_exits, stages))
    expected = (polling + broadcast) / ((2.0 - p.pr1 - p.pr2) * cfg.codeword_bits)
    assert eb_df_renewal(cfg, rate, p) == pytest.approx(expected)


def test_eb_df_broadcast_always_lost(cfg: NetworkConfig):
    with pytest.raises(InfiniteEnergyError):
        eb_df_renewal(cfg, 1.0, DfOutageProfile(0.1, 0.1, 1.0, 1.0))


def test_normalized_rate():
    assert normalized_rate(1.5, 2.0) == 0.75
    with pytest.raises(UndefinedRateError):
        normalized_rate(0.0, 0.0)


def test_evaluate_point_rejects_zero_rate(cfg: NetworkConfig):
    with pytest.raises(UndefinedRateError):
        evaluate_point(cfg, Mode.DF, 0.0)


def test_df_point_trapped_in_outage():
    cfg = NetworkConfig.default(0.0)
    point = evaluate_point(cfg, Mode.DF, 12.0)
    assert point.goodput == 0.0
    assert point.normalized_rate == 0.0
    assert math.isinf(point.eb_renewal)
    assert math.isinf(point.eb_paper)


@pytest.mark.parametrize("rate", [0.5, 2.0, 4.0])
def test_df_point(cfg: NetworkConfig, rate: float):
    point = evaluate_point(cfg, Mode.DF, rate)
    assert point.outage.is_symmetric
    assert 0.0 < point.normalized_rate <= 2.0 / 3.0
    assert point.goodput_paper == pytest.approx(point.goodput, rel=1e-10)
    assert point.eb(renewal=False) == point.eb_paper
    assert point.eb_paper < point.eb_renewal

import math

import numpy as np
import pytest

from src.twrn.config import NetworkConfig
from src.twrn.markov import build_df_chain, stationary
from src.twrn.metrics import evaluate_point
from src.twrn.mode import AfState, Mode
from src.twrn.rng import stream
from src.twrn.simulator import (
    AfSimulator,
    DfSimulator,
    replication_pool,
    run_replications,
    simulate_af,
    simulate_df,
)


@pytest.fixture
def af_run(cfg: NetworkConfig):
    return simulate_af(cfg, 2.0, 200_000, seed=42)


@pytest.fixture
def df_run(cfg: NetworkConfig):
    return simulate_df(cfg, 2.0, 300_000, seed=42)


def test_af_tally_conservation(af_run):
    assert af_run.rounds == 200_000
    assert af_run.slots == 2 * af_run.rounds
    assert sum(af_run.total.occupancy) == af_run.slots
    assert af_run.state_occupancy["S_b"] == af_run.rounds
    assert af_run.total.transmissions == (af_run.rounds,) * 3
    assert sum(af_run.total.broadcast_outcomes) == af_run.rounds
    assert len(af_run.batches) == 32


def test_af_matches_analytic(cfg: NetworkConfig, af_run):
    point = evaluate_point(cfg, Mode.AF, 2.0)
    goodput = af_run.empirical_goodput
    eb = af_run.empirical_eb
    assert goodput.within(point.goodput, 4.0)
    assert eb.within(point.eb_renewal, 4.0)
    for link, expected in (("12", point.outage.p12), ("21", point.outage.p21)):
        n = af_run.rounds
        assert abs(af_run.empirical_outage[link].value - expected) < 4 * math.sqrt(expected * (1 - expected) / n)


def test_af_occupancy_follows_outcomes(af_run):
    occupancy = af_run.state_occupancy
    assert occupancy["S3"] * 1000 + occupancy["S1"] * 1000 == af_run.bits_t1_to_t2
    assert occupancy["S3"] * 1000 + occupancy["S2"] * 1000 == af_run.bits_t2_to_t1


def test_df_tally_conservation(cfg: NetworkConfig, df_run):
    assert df_run.slots == 300_000
    assert sum(df_run.total.occupancy) == df_run.slots
    assert sum(df_run.state_occupancy.values()) == df_run.slots
    polls1, polls2, broadcasts = df_run.total.transmissions
    assert polls1 + polls2 + broadcasts == df_run.slots
    assert sum(df_run.total.broadcast_outcomes) == broadcasts
    # a cycle completes when both terminals decode the broadcast
    assert df_run.rounds == df_run.total.broadcast_outcomes[0]
    assert df_run.total.bits_t1_to_t2 >= df_run.rounds * cfg.codeword_bits


def test_df_occupancy_matches_chain(cfg: NetworkConfig, df_run):
    point = evaluate_point(cfg, Mode.DF, 2.0)
    pi = stationary(build_df_chain(point.outage))
    linf = max(abs(a - b) for a, b in zip(df_run.occupancy_fractions, pi.probabilities))
    assert linf <= 0.005


@pytest.mark.parametrize("rate", [1.0, 2.0, 3.0])
def test_df_asymmetric_matches_chain(asymmetric_cfg: NetworkConfig, rate: float):
    # the two single-codeword states only separate when the links differ
    result = simulate_df(asymmetric_cfg, rate, 1_000_000, seed=11)
    point = evaluate_point(asymmetric_cfg, Mode.DF, rate)
    assert not point.outage.is_symmetric
    pi = stationary(build_df_chain(point.outage))
    linf = max(abs(a - b) for a, b in zip(result.occupancy_fractions, pi.probabilities))
    assert linf <= 0.005
    assert result.empirical_eb.value == pytest.approx(point.eb_renewal, rel=0.01)
    assert result.empirical_goodput.within(point.goodput, 3.0)


def test_df_matches_analytic(cfg: NetworkConfig, df_run):
    point = evaluate_point(cfg, Mode.DF, 2.0)
    assert df_run.empirical_goodput.within(point.goodput, 4.0)
    assert df_run.empirical_eb.value == pytest.approx(point.eb_renewal, rel=0.02)
    exits = point.outage.broadcast_exits
    for fraction, expected in zip(df_run.broadcast_exit_fractions, exits):
        assert abs(fraction - expected) < 0.01


def test_same_seed_same_result(cfg: NetworkConfig):
    assert simulate_df(cfg, 1.0, 5_000, seed=7) == simulate_df(cfg, 1.0, 5_000, seed=7)
    assert simulate_af(cfg, 1.0, 5_000, seed=7) == simulate_af(cfg, 1.0, 5_000, seed=7)
    assert simulate_af(cfg, 1.0, 5_000, seed=7) != simulate_af(cfg, 1.0, 5_000, seed=8)


def test_codeword_attempts(cfg: NetworkConfig):
    result = simulate_af(cfg, 4.0, 100_000, seed=1, track_codewords=True)
    for link, bits in (("12", result.bits_t1_to_t2), ("21", result.bits_t2_to_t1)):
        histogram = result.codeword_attempts[link]
        assert histogram[0] == 0
        assert sum(histogram) == bits // cfg.codeword_bits
        mean_attempts = sum(i * c for i, c in enumerate(histogram)) / sum(histogram)
        p = result.empirical_outage[link].value
        assert mean_attempts == pytest.approx(1.0 / (1.0 - p), rel=0.02)


def test_codeword_attempts_off_by_default(af_run):
    assert af_run.codeword_attempts is None
    assert "codeword_attempts" not in af_run.to_dict()


def test_replications_merge(cfg: NetworkConfig):
    result = run_replications(cfg, Mode.DF, 2.0, 10_000, 4, master_seed=42)
    assert result.replications == 4
    assert result.slots == 40_000
    assert len(result.batches) == 4
    assert not math.isnan(result.empirical_goodput.stderr)


def test_replications_do_not_depend_on_workers(cfg: NetworkConfig):
    serial = run_replications(cfg, Mode.AF, 2.0, 5_000, 3, master_seed=42, workers=1)
    parallel = run_replications(cfg, Mode.AF, 2.0, 5_000, 3, master_seed=42, workers=2)
    assert serial == parallel


def test_single_replication_is_plain_run(cfg: NetworkConfig):
    assert run_replications(cfg, Mode.DF, 1.0, 2_000, 1, master_seed=5) == simulate_df(cfg, 1.0, 2_000, seed=5)


def test_small_runs(cfg: NetworkConfig):
    result = DfSimulator(cfg, 1.0).run(3, stream(0))
    assert result.slots == 3
    assert len(result.batches) == 3
    assert result.occupancy_fractions[0] > 0


@pytest.mark.parametrize("size", [0, -5])
def test_rejects_empty_runs(cfg: NetworkConfig, size: int):
    with pytest.raises(ValueError):
        AfSimulator(cfg, 1.0).run(size, stream(0))


def test_rejects_zero_rate(cfg: NetworkConfig):
    with pytest.raises(ValueError):
        DfSimulator(cfg, 0.0)


def test_result_to_dict(df_run):
    report = df_run.to_dict()
    assert report["mode"] == "df"
    assert sum(report["state_occupancy"].values()) == report["slots"]
    assert set(report["empirical_outage"]) == {"1r", "2r", "r1", "r2"}


def test_af_uplink_occupancy_is_half(af_run):
    assert af_run.occupancy_fractions[AfState.SB.value] == 0.5


def test_energy_accounting(cfg: NetworkConfig, af_run):
    slot = cfg.codeword_bits / (2.0 * cfg.bandwidth_hz)
    expected = af_run.rounds * (cfg.p1 + cfg.p2 + cfg.pr) * slot
    assert af_run.energy == pytest.approx(expected)
    assert np.isfinite(af_run.empirical_eb.value)


def test_paper_units_drop_bandwidth(cfg: NetworkConfig):
    plain = simulate_af(cfg, 2.0, 5_000, seed=3)
    paper = simulate_af(cfg, 2.0, 5_000, seed=3, paper_units=True)
    assert paper.total == plain.total
    assert paper.energy == pytest.approx(plain.energy * cfg.bandwidth_hz)
    df_paper = simulate_df(cfg, 2.0, 5_000, seed=3, paper_units=True)
    assert df_paper.empirical_eb.value == pytest.approx(
        simulate_df(cfg, 2.0, 5_000, seed=3).empirical_eb.value * cfg.bandwidth_hz)


def test_shared_pool(cfg: NetworkConfig):
    serial = run_replications(cfg, Mode.DF, 2.0, 5_000, 3, master_seed=42)
    with replication_pool(2) as pool:
        first = run_replications(cfg, Mode.DF, 2.0, 5_000, 3, master_seed=42, pool=pool)
        second = run_replications(cfg, Mode.AF, 2.0, 5_000, 3, master_seed=42, pool=pool)
    assert first == serial
    assert second == run_replications(cfg, Mode.AF, 2.0, 5_000, 3, master_seed=42)


def test_serial_pool_is_none():
    with replication_pool(1) as pool:
        assert pool is None

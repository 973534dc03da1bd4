import math

import pytest

from src.twrn.rng import stream
from src.twrn.tally import Estimate, Tally, ratio_estimate


def zeros(n_states: int, n_links: int) -> Tally:
    return Tally(0, 0, 0, 0, (0, 0, 0), (0,) * n_states, (0,) * n_links, (0,) * n_links, (0, 0, 0, 0))


def test_ratio_estimate():
    estimate = ratio_estimate([1.0, 2.0, 3.0], [2.0, 2.0, 2.0])
    assert estimate.value == pytest.approx(1.0)
    assert estimate.stderr == pytest.approx(math.sqrt(2.0 / 6.0) / 2.0)


def test_ratio_estimate_single_batch():
    estimate = ratio_estimate([3.0], [4.0])
    assert estimate.value == 0.75
    assert math.isnan(estimate.stderr)


def test_ratio_estimate_empty_denominator():
    assert math.isinf(ratio_estimate([5.0, 1.0], [0.0, 0.0]).value)
    assert math.isnan(ratio_estimate([0.0, 0.0], [0.0, 0.0]).value)


@pytest.mark.parametrize("estimate, target, sigmas, expected", [
    (Estimate(1.0, 0.1), 1.25, 3.0, True),
    (Estimate(1.0, 0.1), 1.35, 3.0, False),
    (Estimate(1.0, 0.0), 1.0, 3.0, True),
    (Estimate(1.0, 0.0), 1.01, 3.0, False),
    (Estimate(1.0, math.nan), 1.0, 3.0, False),
])
def test_within(estimate: Estimate, target: float, sigmas: float, expected: bool):
    assert estimate.within(target, sigmas) is expected


def test_tally_addition():
    a = Tally(4, 1, 1000, 0, (1, 1, 1), (2, 1, 0, 1), (2, 1, 1, 1), (1, 0, 0, 1), (0, 1, 0, 0))
    b = Tally(2, 0, 0, 0, (2, 0, 0), (2, 0, 0, 0), (2, 0, 0, 0), (2, 0, 0, 0), (0, 0, 0, 0))
    total = a + b
    assert total.slots == 6
    assert total.transmissions == (3, 1, 1)
    assert total.occupancy == (4, 1, 0, 1)
    assert total.bits == 1000
    assert total.energy((1.0, 2.0, 4.0)) == pytest.approx(3.0 + 2.0 + 4.0)
    assert zeros(4, 4) + a == a


def test_tally_rejects_mixed_modes():
    with pytest.raises(ValueError):
        zeros(4, 4) + zeros(5, 2)


def test_streams_are_reproducible():
    assert stream(42, 3).random(5).tolist() == stream(42, 3).random(5).tolist()
    assert stream(42, 0).random(5).tolist() != stream(42, 1).random(5).tolist()
    assert stream(42, 0).random(5).tolist() != stream(43, 0).random(5).tolist()


def test_stream_rejects_negative_seed():
    with pytest.raises(ValueError):
        stream(-1)

from dataclasses import replace

import pytest

from src.twrn.channel import AfOutagePair, DfOutageProfile
from src.twrn.config import NetworkConfig, derive_params


@pytest.fixture
def cfg():
    return NetworkConfig.default(10.0)


@pytest.fixture
def params(cfg):
    return derive_params(cfg)


@pytest.fixture
def asymmetric_cfg():
    # relay closer to T1
    return replace(NetworkConfig.default(10.0), k=0.3)


@pytest.fixture
def af_outage():
    return AfOutagePair(0.1, 0.2)


@pytest.fixture
def symmetric_profile():
    return DfOutageProfile(0.1, 0.1, 0.2, 0.2)


@pytest.fixture
def asymmetric_profile():
    return DfOutageProfile(0.05, 0.3, 0.4, 0.1)

# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Tuple, Union

from .errors import ConfigError

DEFAULT_SNR_DB = 10.0
DEFAULT_NOISE_POWER = 1e-10
DEFAULT_K = 0.5
DEFAULT_ALPHA = 3.12
DEFAULT_BANDWIDTH_HZ = 1e6
DEFAULT_CODEWORD_BITS = 1000
DEFAULT_SEED = 42


def db_to_linear(value_db: float) -> float:
    return 10.0 ** (value_db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class NetworkConfig:
    """
    Physical parameters of the two-way relay network. Powers and noise are in watts,
    the T1-T2 channel variance is normalised to 1.
    """
    p1: float
    p2: float
    pr: float
    noise_power: float
    k: float
    alpha: float
    bandwidth_hz: float
    codeword_bits: int
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        for name in ("p1", "p2", "pr", "noise_power", "bandwidth_hz"):
            value = getattr(self, name)
            if not _is_real(value) or not math.isfinite(value) or value <= 0:
                raise ConfigError(name, f"must be a finite number > 0, got {value!r}")
        if not _is_real(self.k) or not 0 < self.k < 1:
            raise ConfigError("k", f"must lie in the open interval (0, 1), got {self.k!r}")
        if not _is_real(self.alpha) or not math.isfinite(self.alpha) or self.alpha < 0:
            raise ConfigError("alpha", f"must be a finite number >= 0, got {self.alpha!r}")
        if isinstance(self.codeword_bits, bool) or not isinstance(self.codeword_bits, int) \
                or self.codeword_bits < 1:
            raise ConfigError("codeword_bits", f"must be an integer >= 1, got {self.codeword_bits!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed", f"must be an unsigned integer, got {self.seed!r}")

    @classmethod
    def default(cls, snr_db: float = DEFAULT_SNR_DB) -> "NetworkConfig":
        """
        Relay midway between the terminals, equal powers set from the SNR
        :param snr_db: per-node SNR P / noise_power in dB
        :return: the configuration
        """
        power = DEFAULT_NOISE_POWER * db_to_linear(snr_db)
        return cls(
            p1=power,
            p2=power,
            pr=power,
            noise_power=DEFAULT_NOISE_POWER,
            k=DEFAULT_K,
            alpha=DEFAULT_ALPHA,
            bandwidth_hz=DEFAULT_BANDWIDTH_HZ,
            codeword_bits=DEFAULT_CODEWORD_BITS,
            seed=DEFAULT_SEED,
        )

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NetworkConfig":
        if not isinstance(data, dict):
            raise ConfigError("<document>", "configuration must be a JSON object")
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(key, "unknown configuration key")
        for f in fields(cls):
            if f.name not in data and f.name != "seed":
                raise ConfigError(f.name, "missing required configuration key")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "NetworkConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError("<document>", f"invalid JSON: {e}") from e
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def with_snr_db(self, snr_db: float) -> "NetworkConfig":
        """
        Copy with all three transmit powers set to give the requested per-node SNR
        """
        power = self.noise_power * db_to_linear(snr_db)
        return replace(self, p1=power, p2=power, pr=power)

    def with_noise_psd(self) -> "NetworkConfig":
        """
        Copy where noise_power is read as a spectral density and multiplied by the bandwidth
        """
        return replace(self, noise_power=self.noise_power * self.bandwidth_hz)

    @property
    def snr(self) -> Tuple[float, float, float]:
        """
        Linear SNRs (T1, T2, relay)
        """
        return self.p1 / self.noise_power, self.p2 / self.noise_power, self.pr / self.noise_power

    @property
    def snr_db(self) -> Tuple[float, float, float]:
        return tuple(linear_to_db(s) for s in self.snr)


@dataclass(frozen=True)
class DerivedParams:
    sigma1_sq: float
    sigma2_sq: float
    beta: float
    snr: Tuple[float, float, float]

    @property
    def beta_sq(self) -> float:
        return self.beta ** 2


def derive_params(cfg: NetworkConfig) -> DerivedParams:
    """
    Computes the mean link gains, the AF amplification factor and the per-node SNRs
    :param cfg: network configuration
    :return: the derived parameters
    """
    if not isinstance(cfg, NetworkConfig):
        raise TypeError(f"Expected NetworkConfig, got {type(cfg).__name__}")
    sigma1_sq = cfg.k ** (-cfg.alpha)
    sigma2_sq = (1.0 - cfg.k) ** (-cfg.alpha)
    beta = math.sqrt(cfg.pr / (cfg.p1 * sigma1_sq + cfg.p2 * sigma2_sq + cfg.noise_power))
    return DerivedParams(sigma1_sq=sigma1_sq, sigma2_sq=sigma2_sq, beta=beta, snr=cfg.snr)


def load_config(path: Union[str, Path]) -> NetworkConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError("<file>", f"cannot read {path}: {e.strerror}") from e
    return NetworkConfig.from_json(text)


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)

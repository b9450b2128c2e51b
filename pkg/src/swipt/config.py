"""System and policy parameter containers."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

RATE_MODELS = ("logdet", "per_subchannel")


class ConfigError(ValueError):
    """A parameter lies outside its admissible range."""


@dataclass(frozen=True)
class SystemConfig:
    """Scalar system parameters.

    Powers are in Watts, ``bandwidth`` in Hz, delay spreads in samples
    (interpreted as tap counts) and ``target_energy`` in Joules per OFDM
    block.

    ``rate_model`` selects how the Bob/Eve rates are evaluated:
    ``"logdet"`` is the exact joint log-determinant, ``"per_subchannel"``
    replaces each noise-plus-interference covariance by its diagonal, i.e.
    a receiver decoding every sub-channel separately.
    """

    n_subchannels: int = 64
    cp_length: int = 16
    total_power: float = 1e4
    noise_bob: float = 1.0
    noise_eve: float = 1.0
    eh_efficiency: float = 0.6
    bandwidth: float = 1e6
    delay_spread_bob: int = 16
    delay_spread_eve: int = 16
    target_energy: float = 0.0
    rate_model: str = "logdet"

    def __post_init__(self):
        n = self.n_subchannels
        if n < 1:
            raise ConfigError(f"n_subchannels must be >= 1, got {n}")
        if self.delay_spread_bob < 1 or self.delay_spread_eve < 1:
            raise ConfigError("delay spreads must be >= 1")
        check_cp_length(self.cp_length, self)
        if self.delay_spread_eve > self.cp_length + 1:
            raise ConfigError(
                f"delay_spread_eve={self.delay_spread_eve} exceeds cp_length + 1"
            )
        if self.total_power <= 0:
            raise ConfigError("total_power must be > 0")
        if self.noise_bob <= 0 or self.noise_eve <= 0:
            raise ConfigError("noise powers must be > 0")
        if not 0.0 <= self.eh_efficiency <= 1.0:
            raise ConfigError("eh_efficiency must lie in [0, 1]")
        if self.bandwidth <= 0:
            raise ConfigError("bandwidth must be > 0")
        if self.target_energy < 0:
            raise ConfigError("target_energy must be >= 0")
        if self.rate_model not in RATE_MODELS:
            raise ConfigError(f"rate_model must be one of {RATE_MODELS}")

    @property
    def sample_time(self) -> float:
        return 1.0 / self.bandwidth

    def block_length(self, cp_length: int | None = None) -> int:
        """Samples per OFDM block, ``N + N_cp``."""
        ncp = self.cp_length if cp_length is None else cp_length
        return self.n_subchannels + ncp

    def cp_duration(self, cp_length: int | None = None) -> float:
        ncp = self.cp_length if cp_length is None else cp_length
        return ncp * self.sample_time

    def block_duration(self, cp_length: int | None = None) -> float:
        return self.block_length(cp_length) * self.sample_time

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, order=True)
class PolicyParams:
    """Decision variables: data power fraction, PS ratio, PS samples, CP length."""

    theta: float
    rho: float
    gamma: int
    cp_length: int

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [0, 1], got {self.theta}")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must lie in [0, 1], got {self.rho}")
        if int(self.gamma) != self.gamma or self.gamma < 0:
            raise ConfigError(f"gamma must be a non-negative integer, got {self.gamma}")
        if int(self.cp_length) != self.cp_length or self.cp_length < 1:
            raise ConfigError(f"cp_length must be a positive integer, got {self.cp_length}")
        object.__setattr__(self, "gamma", int(self.gamma))
        object.__setattr__(self, "cp_length", int(self.cp_length))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "rho", float(self.rho))

    @property
    def theta_bar(self) -> float:
        return 1.0 - self.theta

    def beta(self, n_subchannels: int) -> float:
        """Fraction of the post-CP duration that is power split."""
        return self.gamma / n_subchannels

    def validate(self, cfg: SystemConfig) -> None:
        """Check the policy against the feasible set of ``cfg``."""
        check_cp_length(self.cp_length, cfg)
        if self.gamma > cfg.n_subchannels:
            raise ConfigError(
                f"gamma={self.gamma} exceeds n_subchannels={cfg.n_subchannels}"
            )
        if cfg.delay_spread_eve > self.cp_length + 1:
            raise ConfigError(
                f"delay_spread_eve={cfg.delay_spread_eve} exceeds cp_length + 1"
            )

    def to_dict(self) -> dict:
        return asdict(self)


def check_cp_length(cp_length: int, cfg: SystemConfig) -> None:
    if not cfg.delay_spread_bob <= cp_length <= cfg.n_subchannels:
        raise ConfigError(
            f"cp_length={cp_length} outside [delay_spread_bob={cfg.delay_spread_bob}, "
            f"n_subchannels={cfg.n_subchannels}]"
        )


def reference_config(**overrides) -> SystemConfig:
    """The simulation setup used for the reported figures (P/kappa = 40 dB)."""
    base = SystemConfig(
        n_subchannels=64,
        cp_length=16,
        total_power=1e4,
        noise_bob=1.0,
        noise_eve=1.0,
        eh_efficiency=0.6,
        bandwidth=1e6,
        delay_spread_bob=16,
        delay_spread_eve=16,
    )
    return replace(base, **overrides) if overrides else base

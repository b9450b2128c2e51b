"""Secrecy rate and harvested energy of the hybrid TS/PS receiver.

The production path never forms the ``N x N`` covariance matrices of the
rate expressions. Two identities carry the work:

* Bob. With ``s = theta P / (N_T kappa_B)`` and ``w_k = s|H_k|^2 / (1 + s|H_k|^2)``,
  ``N_T R_B = sum_k log2(1 + s|H_k|^2) + log2 det(I_gamma - (1 - rho) T_gamma)``
  where ``T_gamma`` is the leading ``gamma x gamma`` block of the circulant
  ``F* diag(w) F``. One Cholesky factor of ``I - (1 - rho) T_N`` yields the
  leading principal minors, hence the rate for every ``gamma`` at once.
* Eve. With ``a = theta P / N_T``, ``b = (1 - theta) P / N_cp`` and ``J`` of
  width ``N_cp``, the ``N x N`` determinants collapse to ``N_cp x N_cp`` ones
  through ``det(kI + aD + bJJ*) = det(kI + aD) det(I + b J*(kI + aD)^-1 J)``.

``swipt.oracles`` holds the literal dense evaluations these are tested against.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .channel import ChannelRealization
from .config import PolicyParams, SystemConfig
from .ofdm import (
    AnPrecoder,
    RankDeficiencyError,
    an_precoder_stack,
    subchannel_gains,
    toeplitz_stack,
)

__all__ = [
    "LinkMetrics",
    "LinkEnsemble",
    "noise_covariance",
    "rate_bob",
    "rate_eve",
    "secrecy_rate",
    "energy_cp",
    "energy_gamma",
    "evaluate_policy",
]

BOB_CACHE_SIZE = 16


@dataclass(frozen=True)
class LinkMetrics:
    """Per-realization rates (bits/s/Hz, 1/N_T normalised) and energies (J/slot)."""

    rate_bob: float
    rate_eve: float
    secrecy_rate: float
    energy_cp: float
    energy_gamma: float
    energy_total: float

    def to_dict(self) -> dict:
        return asdict(self)


def noise_covariance(rho: float, gamma: int, n_subchannels: int, noise_power: float) -> np.ndarray:
    """Bob's post-CP-removal noise covariance after undoing the power split.

    The first ``gamma`` samples carry variance ``noise_power / rho``.
    """
    if not 0 <= gamma <= n_subchannels:
        raise ValueError(f"gamma={gamma} outside [0, {n_subchannels}]")
    if gamma > 0 and rho <= 0:
        raise ZeroDivisionError("rho must be > 0 when gamma > 0")
    diag = np.full(n_subchannels, float(noise_power))
    diag[:gamma] /= rho
    return np.diag(diag)


def secrecy_rate(rb, re):
    """``max(rb - re, 0)``, element-wise for arrays."""
    out = np.maximum(np.subtract(rb, re), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def _logdet2_hermitian(m: np.ndarray) -> np.ndarray:
    sign, logabs = np.linalg.slogdet(m)
    return logabs / np.log(2.0)


class LinkEnsemble:
    """Channel-derived quantities for a stack of draws at one CP length.

    Everything that depends on the channels but not on ``(theta, rho,
    gamma)`` is computed once here; the rate and energy methods are then
    cheap closed forms vectorised over the draws. Results for a given
    ``theta`` (Eve) or ``(theta, rho)`` (Bob, all ``gamma``) are cached.

    Parameters
    ----------
    cfg : SystemConfig
    cp_length : int
    taps_bob, taps_eve : ndarray, shape (n_draws, n_taps)
    q : ndarray, optional
        Precoders of shape ``(n_draws, N_T, N_cp)``. Computed from
        ``taps_bob`` when omitted.
    """

    def __init__(self, cfg: SystemConfig, cp_length: int, taps_bob, taps_eve, q=None):
        self.cfg = cfg
        self.cp_length = ncp = int(cp_length)
        n = cfg.n_subchannels
        nt = n + ncp
        self.block_length = nt
        taps_bob = np.atleast_2d(np.asarray(taps_bob, dtype=complex))
        taps_eve = np.atleast_2d(np.asarray(taps_eve, dtype=complex))
        if taps_bob.shape[-1] > ncp + 1 or taps_eve.shape[-1] > ncp + 1:
            raise ValueError("channel memory exceeds the cyclic prefix")
        if q is None:
            q, ok = an_precoder_stack(taps_bob, n, ncp)
        else:
            q = np.asarray(q, dtype=complex).reshape(taps_bob.shape[0], nt, ncp)
            ok = np.ones(taps_bob.shape[0], dtype=bool)
        self.ok = ok

        self.gain_bob = np.abs(subchannel_gains(taps_bob, n)) ** 2
        self.gain_eve = np.abs(subchannel_gains(taps_eve, n)) ** 2
        self.power_bob = np.sum(np.abs(taps_bob) ** 2, axis=-1)

        h_time = toeplitz_stack(taps_bob, nt)
        g_time = toeplitz_stack(taps_eve, nt)
        # CP rows of H_time A_cp: columns 0..N_cp-1 land on data indices N-N_cp..N-1
        h_cp = h_time[:, :ncp, :]
        cp_data = h_cp[:, :, ncp:].copy()
        cp_data[:, :, n - ncp:] += h_cp[:, :, :ncp]
        self.cp_data = np.sum(np.abs(cp_data) ** 2, axis=(-2, -1))
        self.cp_an = np.sum(np.abs(h_cp @ q) ** 2, axis=(-2, -1))
        self.an_leak = np.fft.fft(g_time[:, ncp:, :] @ q, axis=-2, norm="ortho")
        self.q = q
        self._eve_cache: dict = {}
        self._bob_cache: dict = {}

    @classmethod
    def from_channels(cls, cfg, cp_length, channels, precoder: AnPrecoder | None = None):
        channels = list(channels)
        hb = np.stack([c.taps_bob for c in channels])
        he = np.stack([c.taps_eve for c in channels])
        q = None if precoder is None else precoder.q_matrix[None]
        return cls(cfg, cp_length, hb, he, q)

    @property
    def n_draws(self) -> int:
        return self.gain_bob.shape[0]

    def require_valid(self) -> None:
        if not np.all(self.ok):
            raise RankDeficiencyError(
                f"{int(np.sum(~self.ok))} draw(s) gave a degenerate AN null space"
            )

    # -- Eve -------------------------------------------------------------
    def rate_eve(self, theta: float) -> np.ndarray:
        theta = float(theta)
        if theta not in self._eve_cache:
            self._eve_cache[theta] = self._rate_eve(theta)
        return self._eve_cache[theta]

    def _rate_eve(self, theta):
        cfg = self.cfg
        a = theta * cfg.total_power / self.block_length
        b = (1.0 - theta) * cfg.total_power / self.cp_length
        kappa = cfg.noise_eve
        g = self.gain_eve
        j = self.an_leak
        if cfg.rate_model == "per_subchannel":
            interference = b * np.sum(np.abs(j) ** 2, axis=-1)
            return np.sum(np.log2(1.0 + a * g / (interference + kappa)), axis=-1) / self.block_length
        total = np.sum(np.log2(1.0 + a * g / kappa), axis=-1)
        if b > 0:
            jh = np.conj(np.swapaxes(j, -1, -2))
            eye = np.eye(self.cp_length)
            inner = jh @ (j / (kappa + a * g)[..., None])
            total = total + _logdet2_hermitian(eye + b * inner) - _logdet2_hermitian(
                eye + (b / kappa) * (jh @ j)
            )
        return total / self.block_length

    # -- Bob -------------------------------------------------------------
    def rate_bob_all_gamma(self, theta: float, rho: float) -> np.ndarray:
        """Bob's rate for ``gamma = 0..N``; shape ``(n_draws, N + 1)``."""
        key = (float(theta), float(rho))
        if key not in self._bob_cache:
            if len(self._bob_cache) >= BOB_CACHE_SIZE:
                self._bob_cache.pop(next(iter(self._bob_cache)))
            self._bob_cache[key] = self._rate_bob_all_gamma(*key)
        return self._bob_cache[key]

    def _rate_bob_all_gamma(self, theta, rho):
        cfg = self.cfg
        n = cfg.n_subchannels
        nt = self.block_length
        snr = theta * cfg.total_power / (nt * cfg.noise_bob) * self.gain_bob
        gammas = np.arange(n + 1)
        if cfg.rate_model == "per_subchannel":
            if rho > 0:
                inflation = (gammas / rho + n - gammas) / n
            else:
                inflation = np.where(gammas > 0, np.inf, 1.0)
            rates = np.sum(np.log2(1.0 + snr[:, None, :] / inflation[None, :, None]), axis=-1)
            return rates / nt
        base = np.sum(np.log2(1.0 + snr), axis=-1)
        minors = np.zeros((self.n_draws, n + 1))
        if rho < 1.0:
            w = snr / (1.0 + snr)
            col = np.fft.ifft(w, axis=-1)
            lag = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
            m = np.eye(n) - (1.0 - rho) * col[:, lag]
            chol = np.linalg.cholesky(m)
            diag = np.abs(np.diagonal(chol, axis1=-2, axis2=-1))
            minors[:, 1:] = np.cumsum(2.0 * np.log2(diag), axis=-1)
        return (base[:, None] + minors) / nt

    def rate_bob(self, theta: float, rho: float, gamma: int) -> np.ndarray:
        return self.rate_bob_all_gamma(theta, rho)[:, int(gamma)]

    # -- energy ----------------------------------------------------------
    def energy_cp(self, theta: float) -> np.ndarray:
        cfg = self.cfg
        trace = theta * self.cp_data / self.block_length + (1.0 - theta) * self.cp_an / self.cp_length
        return cfg.eh_efficiency * cfg.total_power * trace * cfg.cp_duration(self.cp_length)

    def energy_gamma(self, theta: float, rho: float, gamma) -> np.ndarray:
        """Energy from the first ``gamma`` post-CP samples.

        Every row of the circulant ``R_cp H_time A_cp`` has squared norm
        ``sum |h|^2``, so ``Tr{K K*} = gamma * sum |h|^2``. ``gamma`` may be an
        array; the result then broadcasts to ``(n_draws, len(gamma))``.
        """
        cfg = self.cfg
        gamma = np.asarray(gamma, dtype=float)
        scale = cfg.eh_efficiency * theta * cfg.total_power * (1.0 - rho) / self.block_length
        trace = np.multiply.outer(self.power_bob, gamma)
        return scale * trace * gamma * cfg.sample_time

    def metrics(self, policy: PolicyParams) -> dict[str, np.ndarray]:
        """Per-draw metric arrays for one policy."""
        if policy.cp_length != self.cp_length:
            raise ValueError("policy cp_length does not match the ensemble")
        rb = self.rate_bob(policy.theta, policy.rho, policy.gamma)
        re = self.rate_eve(policy.theta)
        ecp = self.energy_cp(policy.theta)
        eg = self.energy_gamma(policy.theta, policy.rho, policy.gamma)
        return {
            "rate_bob": rb,
            "rate_eve": re,
            "secrecy_rate": secrecy_rate(rb, re),
            "energy_cp": ecp,
            "energy_gamma": eg,
            "energy_total": ecp + eg,
        }


def _single(chan: ChannelRealization, policy: PolicyParams, cfg: SystemConfig, precoder=None):
    policy.validate(cfg)
    ens = LinkEnsemble.from_channels(cfg, policy.cp_length, [chan], precoder)
    ens.require_valid()
    return ens


def rate_bob(chan: ChannelRealization, policy: PolicyParams, cfg: SystemConfig) -> float:
    """Bob's achievable rate.

    At ``rho = 0`` the power-split samples carry no information and the
    value returned is the continuous limit (zero only when ``gamma = N``).
    """
    return float(_single(chan, policy, cfg).rate_bob(policy.theta, policy.rho, policy.gamma)[0])


def rate_eve(chan: ChannelRealization, policy: PolicyParams, precoder: AnPrecoder, cfg: SystemConfig) -> float:
    """Eve's rate under the AN precoder designed for Bob's channel."""
    return float(_single(chan, policy, cfg, precoder).rate_eve(policy.theta)[0])


def energy_cp(chan: ChannelRealization, policy: PolicyParams, precoder: AnPrecoder, cfg: SystemConfig) -> float:
    return float(_single(chan, policy, cfg, precoder).energy_cp(policy.theta)[0])


def energy_gamma(chan: ChannelRealization, policy: PolicyParams, cfg: SystemConfig) -> float:
    policy.validate(cfg)
    taps = np.asarray(chan.taps_bob, dtype=complex)
    if taps.size > policy.cp_length + 1:
        raise ValueError("channel memory exceeds the cyclic prefix")
    nt = cfg.block_length(policy.cp_length)
    trace = policy.gamma * np.sum(np.abs(taps) ** 2)
    scale = cfg.eh_efficiency * policy.theta * cfg.total_power * (1.0 - policy.rho) / nt
    return float(scale * trace * policy.gamma * cfg.sample_time)


def evaluate_policy(chan: ChannelRealization, policy: PolicyParams, cfg: SystemConfig) -> LinkMetrics:
    """All link metrics of one realization; operators and precoder are built once."""
    ens = _single(chan, policy, cfg)
    return LinkMetrics(**{k: float(v[0]) for k, v in ens.metrics(policy).items()})

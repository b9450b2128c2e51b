"""Literal dense-matrix evaluations of the rate and energy expressions.

These are deliberately naive: every operator is materialised, inverses are
explicit and traces are taken over full products. They exist to check the
structured fast path in :mod:`swipt.metrics` and are only practical for
small ``N``.
"""

from __future__ import annotations

import numpy as np

from .config import PolicyParams, SystemConfig
from .ofdm import build_operators


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT built entry by entry."""
    out = np.empty((n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            out[j, k] = np.exp(-2j * np.pi * j * k / n) / np.sqrt(n)
    return out


def toeplitz_loop(taps, size: int) -> np.ndarray:
    taps = np.asarray(taps, dtype=complex)
    out = np.zeros((size, size), dtype=complex)
    for r in range(size):
        for c in range(size):
            if 0 <= r - c < taps.size:
                out[r, c] = taps[r - c]
    return out


def null_space_svd(a: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Orthonormal right null space of ``a`` via a dense SVD."""
    _, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > rtol * s[0]))
    return vh[rank:].conj().T


def _log2det(m: np.ndarray) -> float:
    sign, logabs = np.linalg.slogdet(m)
    return float(logabs / np.log(2.0))


def _dense_parts(taps_bob, taps_eve, policy: PolicyParams, cfg: SystemConfig, q=None):
    n, ncp = cfg.n_subchannels, policy.cp_length
    nt = n + ncp
    ops = build_operators(n, ncp, policy.gamma)
    f = dft_matrix(n)
    h_time = toeplitz_loop(taps_bob, nt)
    g_time = toeplitz_loop(taps_eve, nt)
    if q is None:
        q = null_space_svd(ops.cp_remove @ h_time)
    return ops, f, h_time, g_time, q


def rate_bob_dense(taps_bob, policy: PolicyParams, cfg: SystemConfig) -> float:
    n = cfg.n_subchannels
    nt = n + policy.cp_length
    ops, f, h_time, _, _ = _dense_parts(taps_bob, taps_bob, policy, cfg, q=np.zeros((nt, 1)))
    h = f @ ops.cp_remove @ h_time @ ops.cp_insert @ f.conj().T
    sigma = np.diag(
        [cfg.noise_bob / policy.rho] * policy.gamma + [cfg.noise_bob] * (n - policy.gamma)
    )
    m = np.eye(n) + policy.theta * cfg.total_power / nt * h @ h.conj().T @ np.linalg.inv(
        f @ sigma @ f.conj().T
    )
    return _log2det(m) / nt


def rate_eve_dense(taps_bob, taps_eve, policy: PolicyParams, cfg: SystemConfig, q=None) -> float:
    n, ncp = cfg.n_subchannels, policy.cp_length
    nt = n + ncp
    ops, f, _, g_time, q = _dense_parts(taps_bob, taps_eve, policy, cfg, q)
    g = f @ ops.cp_remove @ g_time @ ops.cp_insert @ f.conj().T
    j = f @ ops.cp_remove @ g_time @ q
    cov = (1 - policy.theta) * cfg.total_power / ncp * j @ j.conj().T + cfg.noise_eve * np.eye(n)
    m = np.eye(n) + policy.theta * cfg.total_power / nt * g @ g.conj().T @ np.linalg.inv(cov)
    return _log2det(m) / nt


def energy_cp_dense(taps_bob, policy: PolicyParams, cfg: SystemConfig, q=None) -> float:
    n, ncp = cfg.n_subchannels, policy.cp_length
    nt = n + ncp
    ops, _, h_time, _, q = _dense_parts(taps_bob, taps_bob, policy, cfg, q)
    a = ops.cp_insert
    inner = policy.theta * a @ a.conj().T / nt + (1 - policy.theta) * q @ q.conj().T / ncp
    e = ops.cp_extract
    trace = np.trace(e @ h_time @ inner @ h_time.conj().T @ e.conj().T).real
    return cfg.eh_efficiency * cfg.total_power * trace * ncp * cfg.sample_time


def energy_gamma_dense(taps_bob, policy: PolicyParams, cfg: SystemConfig) -> float:
    """Sum the first ``gamma`` diagonal entries of the received data covariance.

    The transmitted data block ``A_cp F* x`` with ``E{xx*} = theta P / N_T I``
    has covariance ``theta P / N_T A_cp A_cp*``; after CP removal the sample
    covariance is ``R H (.) H* R*``. The AN term is cancelled there.
    """
    n, ncp = cfg.n_subchannels, policy.cp_length
    nt = n + ncp
    ops, f, h_time, _, _ = _dense_parts(taps_bob, taps_bob, policy, cfg, q=np.zeros((nt, 1)))
    x_cov = policy.theta * cfg.total_power / nt * np.eye(n)
    tx = ops.cp_insert @ f.conj().T
    rx = ops.cp_remove @ h_time @ tx
    sample_cov = rx @ x_cov @ rx.conj().T
    power = np.trace(sample_cov[: policy.gamma, : policy.gamma]).real
    return cfg.eh_efficiency * (1 - policy.rho) * power * policy.gamma * cfg.sample_time

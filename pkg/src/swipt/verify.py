"""Self-checks behind ``swipt verify``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracles
from .channel import draw_channel
from .config import PolicyParams, SystemConfig
from .metrics import LinkEnsemble
from .ofdm import (
    an_precoder_stack,
    build_operators,
    build_toeplitz_channel,
    subchannel_gains,
    toeplitz_stack,
)

CANCEL_TOL = 1e-10
DIAG_TOL = 1e-10
ORACLE_TOL = 1e-9

ORACLE_CFG = SystemConfig(
    n_subchannels=8,
    cp_length=3,
    total_power=100.0,
    delay_spread_bob=3,
    delay_spread_eve=3,
)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag}  {self.name:<28} value={self.value:.3e}  tol={self.tolerance:.0e}"


def _check(name, value, tol) -> Check:
    value = float(value)
    return Check(name, bool(value <= tol), value, tol)


def _taps(seed, n_draws, cfg):
    draws = [draw_channel(seed, i, cfg.delay_spread_bob, cfg.delay_spread_eve) for i in range(n_draws)]
    return np.stack([d.taps_bob for d in draws]), np.stack([d.taps_eve for d in draws])


def operator_checks(cfg: SystemConfig) -> list[Check]:
    n, ncp = cfg.n_subchannels, cfg.cp_length
    ops = build_operators(n, ncp, n // 2)
    f = ops.fft_matrix
    taps = np.arange(1, cfg.delay_spread_bob + 1) * (1 - 0.5j)
    nt = n + ncp
    x = np.cos(np.arange(nt)) + 1j * np.sin(0.3 * np.arange(nt))
    conv = np.convolve(taps, x)[:nt]
    return [
        _check("cp_remove_insert_identity", np.abs(ops.cp_remove @ ops.cp_insert - np.eye(n)).max(), 0.0),
        _check("dft_unitary", np.abs(f @ f.conj().T - np.eye(n)).max(), 1e-12),
        _check("dft_matches_direct_sum", np.abs(f - oracles.dft_matrix(n)).max(), 1e-12),
        _check("toeplitz_is_convolution", np.abs(build_toeplitz_channel(taps, nt, nt) @ x - conv).max(), 1e-10),
    ]


def precoder_checks(cfg: SystemConfig, seed: int, n_draws: int, inject_fault: bool = False) -> list[Check]:
    n, ncp = cfg.n_subchannels, cfg.cp_length
    nt = n + ncp
    h, _ = _taps(seed, n_draws, cfg)
    q, ok = an_precoder_stack(h, n, ncp)
    if inject_fault:
        q = q.copy()
        q[0, -1, 0] += 1.0
    h_time = toeplitz_stack(h, nt)
    leak = h_time[:, ncp:, :] @ q
    cancel = np.max(np.abs(leak).max(axis=(-2, -1)) / np.abs(h).max(axis=-1))
    gram = np.conj(np.swapaxes(q, -1, -2)) @ q
    ortho = np.abs(gram - np.eye(ncp)).max()

    ops = build_operators(n, ncp)
    f = ops.fft_matrix
    full = f @ ops.cp_remove @ h_time @ ops.cp_insert @ f.conj().T
    diag = np.diagonal(full, axis1=-2, axis2=-1)
    off = full - diag[..., None] * np.eye(n)
    off_rel = np.max(np.linalg.norm(off, axis=(-2, -1)) / np.linalg.norm(diag, axis=-1))
    dft_rel = np.max(np.abs(diag - subchannel_gains(h, n)).max(axis=-1) / np.abs(diag).max(axis=-1))
    return [
        _check("null_space_dimension", float(np.sum(~ok)), 0.0),
        _check("an_cancellation", cancel, CANCEL_TOL),
        _check("precoder_orthonormal", ortho, CANCEL_TOL),
        _check("diagonalization_residual", off_rel, DIAG_TOL),
        _check("diagonal_equals_padded_dft", dft_rel, DIAG_TOL),
    ]


def oracle_checks(seed: int, n_pairs: int = 50, cfg: SystemConfig = ORACLE_CFG) -> list[Check]:
    """Compare the fast path with the dense oracles on small random instances."""
    rng = np.random.default_rng(seed)
    worst = dict(rate_bob=0.0, rate_eve=0.0, energy_cp=0.0, energy_gamma=0.0)
    for i in range(n_pairs):
        ch = draw_channel(seed, i, cfg.delay_spread_bob, cfg.delay_spread_eve)
        pol = PolicyParams(
            theta=float(rng.uniform(0.05, 0.95)),
            rho=float(rng.uniform(0.05, 1.0)),
            gamma=int(rng.integers(0, cfg.n_subchannels + 1)),
            cp_length=cfg.cp_length,
        )
        ens = LinkEnsemble.from_channels(cfg, pol.cp_length, [ch])
        fast = {k: float(v[0]) for k, v in ens.metrics(pol).items()}
        ref = {
            "rate_bob": oracles.rate_bob_dense(ch.taps_bob, pol, cfg),
            "rate_eve": oracles.rate_eve_dense(ch.taps_bob, ch.taps_eve, pol, cfg),
            "energy_cp": oracles.energy_cp_dense(ch.taps_bob, pol, cfg),
            "energy_gamma": oracles.energy_gamma_dense(ch.taps_bob, pol, cfg),
        }
        for k, v in ref.items():
            scale = max(abs(v), 1e-300)
            worst[k] = max(worst[k], abs(fast[k] - v) / scale if v else abs(fast[k]))
    return [_check(f"oracle_{k}", v, ORACLE_TOL) for k, v in worst.items()]


def run_checks(cfg: SystemConfig, seed: int = 0, n_draws: int = 200, inject_fault: bool = False) -> list[Check]:
    checks = operator_checks(cfg)
    checks += precoder_checks(cfg, seed, n_draws, inject_fault)
    checks += oracle_checks(seed)
    return checks

import math

import numpy as np
import pytest

from swipt import montecarlo
from swipt.channel import draw_channel
from swipt.config import ConfigError, PolicyParams
from swipt.metrics import LinkEnsemble, evaluate_policy
from swipt.montecarlo import TrialSet, estimate, simulate, sweep

POL = PolicyParams(theta=0.5, rho=0.4, gamma=3, cp_length=3)


def test_single_trial_has_no_stderr(small_cfg):
    res = estimate(POL, small_cfg, seed=3, n_trials=1)
    assert math.isfinite(res.mean_secrecy) and math.isfinite(res.mean_energy)
    assert math.isnan(res.stderr_secrecy) and math.isnan(res.stderr_energy)
    d = res.to_dict()
    assert d["stderr_secrecy"] is None and d["n_trials"] == 1
    single = evaluate_policy(draw_channel(3, 0, 3, 3), POL, small_cfg)
    assert res.mean_secrecy == pytest.approx(single.secrecy_rate, rel=1e-13, abs=1e-15)


def test_workers_do_not_change_results(small_cfg):
    policies = [POL, PolicyParams(0.2, 1.0, 0, 3), PolicyParams(0.9, 0.1, 8, 4)]
    serial, r0 = simulate(policies, small_cfg, seed=5, n_trials=600, workers=1)
    parallel, r1 = simulate(policies, small_cfg, seed=5, n_trials=600, workers=3)
    assert r0 == r1
    for k in serial:
        assert serial[k].tobytes() == parallel[k].tobytes()


def test_common_random_numbers(small_cfg):
    other = PolicyParams(0.7, 0.9, 1, 3)
    joint = sweep([POL, other], small_cfg, seed=8, n_trials=300)
    alone = [estimate(p, small_cfg, seed=8, n_trials=300) for p in (POL, other)]
    assert joint == alone


def test_gamma_curves_match_single_estimates(small_cfg):
    ts = TrialSet(small_cfg, seed=2, start=0, stop=300)
    curves = ts.gamma_curves(0.6, 0.3, 3)
    for g in range(small_cfg.n_subchannels + 1):
        res = estimate(PolicyParams(0.6, 0.3, g, 3), small_cfg, seed=2, n_trials=300)
        assert curves["mean_secrecy"][g] == res.mean_secrecy
        assert curves["mean_energy"][g] == res.mean_energy
        assert curves["stderr_energy"][g] == res.stderr_energy


def test_reruns_are_identical(small_cfg):
    a = estimate(POL, small_cfg, seed=11, n_trials=200)
    b = estimate(POL, small_cfg, seed=11, n_trials=200)
    c = estimate(POL, small_cfg, seed=12, n_trials=200)
    assert a == b
    assert a.mean_secrecy != c.mean_secrecy


def test_stderr_shrinks_like_inverse_sqrt(small_cfg):
    small = estimate(POL, small_cfg, seed=4, n_trials=500)
    large = estimate(POL, small_cfg, seed=4, n_trials=2000)
    assert small.stderr_energy / large.stderr_energy == pytest.approx(2.0, rel=0.2)
    assert small.stderr_secrecy / large.stderr_secrecy == pytest.approx(2.0, rel=0.2)


def test_cp_energy_expectation(small_cfg):
    # with theta = 1 the expected CP energy is
    # eta P T_cp / N_T * sum_{i < N_cp} min(i + 1, L) for unit-variance taps
    cfg = small_cfg
    ncp, taps = 3, cfg.delay_spread_bob
    res = estimate(PolicyParams(1.0, 1.0, 0, ncp), cfg, seed=6, n_trials=4000)
    expected = (cfg.eh_efficiency * cfg.total_power * cfg.cp_duration(ncp)
                / cfg.block_length(ncp) * sum(min(i + 1, taps) for i in range(ncp)))
    assert abs(res.mean_energy - expected) <= 4 * res.stderr_energy
    assert res.mean_energy_gamma == 0.0


def test_invalid_policy_rejected(small_cfg):
    with pytest.raises(ConfigError):
        estimate(PolicyParams(0.5, 0.5, 9, 3), small_cfg, seed=0, n_trials=10)
    with pytest.raises(ValueError):
        estimate(POL, small_cfg, seed=0, n_trials=0)


def test_degenerate_draw_is_redrawn(small_cfg, monkeypatch):
    real = LinkEnsemble.from_channels.__func__

    def flaky(cls, cfg, cp_length, channels, *args):
        ens = real(cls, cfg, cp_length, channels, *args)
        if channels[0].index == 0 and channels[0].attempt == 0:
            ens.ok = ens.ok.copy()
            ens.ok[0] = False
        return ens

    monkeypatch.setattr(LinkEnsemble, "from_channels", classmethod(flaky))
    ts = TrialSet(small_cfg, seed=9, start=0, stop=4)
    per_trial = ts.per_trial(POL)
    monkeypatch.undo()
    assert ts.redraws == 1
    replacement = draw_channel(9, 0, 3, 3, attempt=1)
    assert per_trial["secrecy_rate"][0] == pytest.approx(
        evaluate_policy(replacement, POL, small_cfg).secrecy_rate, rel=1e-13, abs=1e-15)


def test_chunking_is_fixed():
    assert montecarlo.CHUNK_SIZE == 256
    ts = TrialSet.__new__(TrialSet)
    ts.start, ts.stop, ts.chunk_size = 0, 600, 256
    assert list(ts._chunks()) == [(0, 256), (256, 512), (512, 600)]

"""Sample-mean estimates of secrecy rate and harvested energy.

Trial ``i`` always uses ``draw_channel(seed, i, ...)`` and every policy in a
call is scored on the same draws (common random numbers). Trials are
processed in fixed-size chunks whose boundaries do not depend on the number
of workers, and per-trial values are reduced in index order, so estimates
are bit-identical for any degree of parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .channel import draw_channel
from .config import PolicyParams, SystemConfig
from .metrics import LinkEnsemble, secrecy_rate

CHUNK_SIZE = 256
MAX_ATTEMPTS = 16
FIELDS = ("rate_bob", "rate_eve", "secrecy_rate", "energy_cp", "energy_gamma", "energy_total")


@dataclass(frozen=True)
class EstimateResult:
    policy: PolicyParams
    mean_secrecy: float
    stderr_secrecy: float
    mean_energy: float
    stderr_energy: float
    mean_energy_cp: float
    mean_energy_gamma: float
    mean_rate_bob: float
    mean_rate_eve: float
    n_trials: int
    seed: int
    redraws: int = 0

    def to_dict(self) -> dict:
        out = {
            "rho": self.policy.rho,
            "gamma": self.policy.gamma,
            "theta": self.policy.theta,
            "n_cp": self.policy.cp_length,
        }
        for name in (
            "mean_secrecy", "stderr_secrecy", "mean_energy", "stderr_energy",
            "mean_energy_cp", "mean_energy_gamma", "mean_rate_bob", "mean_rate_eve",
        ):
            value = getattr(self, name)
            out[name] = None if math.isnan(value) else value
        out.update(n_trials=self.n_trials, seed=self.seed, redraws=self.redraws)
        return out


def _mean_stderr(x: np.ndarray):
    """Mean and standard error over the last axis.

    Callers pass trials on the last, contiguous axis so a curve over gamma
    and a single-policy estimate reduce in exactly the same order.
    """
    x = np.ascontiguousarray(x)
    n = x.shape[-1]
    mean = np.mean(x, axis=-1)
    if n < 2:
        return mean, np.full(mean.shape, np.nan)
    return mean, np.std(x, axis=-1, ddof=1) / np.sqrt(n)


def summarize(policy: PolicyParams, per_trial: dict, seed: int, redraws: int = 0) -> EstimateResult:
    sec = per_trial["secrecy_rate"]
    mean_sec, se_sec = _mean_stderr(sec)
    mean_energy, se_energy = _mean_stderr(per_trial["energy_total"])
    return EstimateResult(
        policy=policy,
        mean_secrecy=float(mean_sec),
        stderr_secrecy=float(se_sec),
        mean_energy=float(mean_energy),
        stderr_energy=float(se_energy),
        mean_energy_cp=float(np.mean(per_trial["energy_cp"])),
        mean_energy_gamma=float(np.mean(per_trial["energy_gamma"])),
        mean_rate_bob=float(np.mean(per_trial["rate_bob"])),
        mean_rate_eve=float(np.mean(per_trial["rate_eve"])),
        n_trials=int(sec.shape[-1]),
        seed=int(seed),
        redraws=int(redraws),
    )


@dataclass
class TrialSet:
    """A fixed block of channel draws ``start <= index < stop`` for one seed.

    Ensembles are built lazily per CP length. A draw whose AN null space is
    degenerate is replaced by ``attempt + 1`` of the same index for every CP
    length, so all policies keep seeing identical channels.
    """

    cfg: SystemConfig
    seed: int
    start: int
    stop: int
    chunk_size: int = CHUNK_SIZE
    _attempts: np.ndarray = field(init=False, repr=False)
    _ensembles: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        if self.stop <= self.start:
            raise ValueError("need at least one trial")
        self._attempts = np.zeros(self.stop - self.start, dtype=int)

    @property
    def n_trials(self) -> int:
        return self.stop - self.start

    @property
    def redraws(self) -> int:
        return int(np.sum(self._attempts))

    def _chunks(self):
        for lo in range(self.start, self.stop, self.chunk_size):
            yield lo, min(lo + self.chunk_size, self.stop)

    def _build(self, lo: int, hi: int, cp_length: int) -> LinkEnsemble:
        cfg = self.cfg
        draws = [
            draw_channel(self.seed, i, cfg.delay_spread_bob, cfg.delay_spread_eve,
                         attempt=int(self._attempts[i - self.start]))
            for i in range(lo, hi)
        ]
        return LinkEnsemble.from_channels(cfg, cp_length, draws)

    def ensembles(self, cp_length: int) -> list[LinkEnsemble]:
        cp_length = int(cp_length)
        while cp_length not in self._ensembles:
            with threadpool_limits(1):
                built = [self._build(lo, hi, cp_length) for lo, hi in self._chunks()]
            bad = np.concatenate([~e.ok for e in built])
            if not bad.any():
                self._ensembles[cp_length] = built
                break
            self._attempts[bad] += 1
            if self._attempts.max() >= MAX_ATTEMPTS:
                raise RuntimeError("could not draw a non-degenerate channel")
            # earlier CP lengths saw the replaced draws
            self._ensembles.clear()
        return self._ensembles[cp_length]

    def drop(self, cp_length: int) -> None:
        self._ensembles.pop(int(cp_length), None)

    def per_trial(self, policy: PolicyParams) -> dict[str, np.ndarray]:
        policy.validate(self.cfg)
        parts = [e.metrics(policy) for e in self.ensembles(policy.cp_length)]
        return {k: np.concatenate([p[k] for p in parts]) for k in FIELDS}

    def estimate(self, policy: PolicyParams) -> EstimateResult:
        return summarize(policy, self.per_trial(policy), self.seed, self.redraws)

    def gamma_curves(self, theta: float, rho: float, cp_length: int) -> dict[str, np.ndarray]:
        """Means and standard errors over trials for every ``gamma = 0..N``."""
        ens = self.ensembles(cp_length)
        gammas = np.arange(self.cfg.n_subchannels + 1)
        with threadpool_limits(1):
            rb = np.concatenate([e.rate_bob_all_gamma(theta, rho) for e in ens])
        re = np.concatenate([e.rate_eve(theta) for e in ens])
        ecp = np.concatenate([e.energy_cp(theta) for e in ens])
        eg = np.concatenate([e.energy_gamma(theta, rho, gammas) for e in ens])
        sec = secrecy_rate(rb, re[:, None]).T
        energy = (ecp[:, None] + eg).T
        mean_sec, se_sec = _mean_stderr(sec)
        mean_energy, se_energy = _mean_stderr(energy)
        return {
            "mean_secrecy": mean_sec,
            "stderr_secrecy": se_sec,
            "mean_energy": mean_energy,
            "stderr_energy": se_energy,
        }


def _chunk_worker(args):
    cfg, seed, lo, hi, policies = args
    ts = TrialSet(cfg, seed, lo, hi)
    with threadpool_limits(1):
        rows = [ts.per_trial(p) for p in policies]
    return {k: np.stack([r[k] for r in rows]) for k in FIELDS}, ts.redraws


def simulate(policies, cfg: SystemConfig, seed: int, n_trials: int, workers: int = 1):
    """Per-trial metrics for every policy.

    Returns ``(table, redraws)`` where ``table[field]`` has shape
    ``(len(policies), n_trials)``.
    """
    policies = list(policies)
    if not policies:
        raise ValueError("no policies given")
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    for p in policies:
        p.validate(cfg)
    jobs = [
        (cfg, seed, lo, min(lo + CHUNK_SIZE, n_trials), policies)
        for lo in range(0, n_trials, CHUNK_SIZE)
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_chunk_worker, jobs))
    else:
        results = [_chunk_worker(j) for j in jobs]
    table = {k: np.concatenate([r[0][k] for r in results], axis=1) for k in FIELDS}
    return table, sum(r[1] for r in results)


def sweep(policies, cfg: SystemConfig, seed: int, n_trials: int, workers: int = 1) -> list[EstimateResult]:
    """Estimate every policy on one shared set of channel draws."""
    policies = list(policies)
    table, redraws = simulate(policies, cfg, seed, n_trials, workers)
    return [
        summarize(p, {k: table[k][i] for k in FIELDS}, seed, redraws)
        for i, p in enumerate(policies)
    ]


def estimate(policy: PolicyParams, cfg: SystemConfig, seed: int, n_trials: int, workers: int = 1) -> EstimateResult:
    return sweep([policy], cfg, seed, n_trials, workers)[0]

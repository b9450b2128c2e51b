"""Sample-average approximation of the constrained design problem.

maximise E{R_sec} over (rho, gamma, theta, N_cp) subject to E{E_H} >= zeta.

All estimates come from one :class:`~swipt.montecarlo.TrialSet`, so the
surrogate problem is deterministic. The integer pair ``(gamma, N_cp)`` is
searched exhaustively (strided if the evaluation budget is too small); the
continuous pair ``(rho, theta)`` is seeded from a square grid and then
refined by a compass search that only accepts feasible improvements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, PolicyParams, SystemConfig
from .montecarlo import TrialSet

TRACE_DTYPE = np.dtype(
    [
        ("rho", "f8"),
        ("gamma", "i8"),
        ("theta", "f8"),
        ("n_cp", "i8"),
        ("mean_secrecy", "f8"),
        ("stderr_secrecy", "f8"),
        ("mean_energy", "f8"),
        ("stderr_energy", "f8"),
        ("feasible", "?"),
        ("stage", "U6"),
    ]
)

INFEASIBLE_ADVICE = "no probed policy meets the energy target; agree on a lower target_energy"


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    best_policy: PolicyParams
    best_objective: float
    constraint_value: float
    constraint_stderr: float
    feasible: bool
    evaluations: int
    target_energy: float
    seed: int
    n_trials: int
    search_trace: np.ndarray
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "best_policy": {
                "rho": self.best_policy.rho,
                "gamma": self.best_policy.gamma,
                "theta": self.best_policy.theta,
                "n_cp": self.best_policy.cp_length,
            },
            "best_objective": self.best_objective,
            "constraint_value": self.constraint_value,
            "constraint_stderr": None if math.isnan(self.constraint_stderr) else self.constraint_stderr,
            "feasible": self.feasible,
            "evaluations": self.evaluations,
            "target_energy": self.target_energy,
            "seed": self.seed,
            "n_trials": self.n_trials,
            "message": self.message,
        }


def is_feasible(mean_energy, stderr_energy, target: float):
    """Energy constraint with a one-standard-error allowance for SAA noise."""
    slack = np.nan_to_num(stderr_energy, nan=0.0)
    return np.asarray(mean_energy) >= target - slack


def _rank_key(row) -> tuple:
    # higher objective, then smaller gamma, larger rho, smaller N_cp, smaller theta
    return (-row["mean_secrecy"], row["gamma"], -row["rho"], row["n_cp"], row["theta"])


def _strided(values: list[int], stride: int) -> list[int]:
    out = values[::stride]
    if out[-1] != values[-1]:
        out.append(values[-1])
    return out


def plan_grid(cfg: SystemConfig, budget: int | None, inner_points: int, cp_lengths=None):
    """Choose the integer grid so that the seed stage uses at most half the budget.

    CP lengths are thinned first (the smallest is always kept), then gamma
    (0 and N are always kept).
    """
    gammas = list(range(cfg.n_subchannels + 1))
    cps = list(cp_lengths) if cp_lengths is not None else list(
        range(cfg.delay_spread_bob, cfg.n_subchannels + 1)
    )
    if budget is None:
        return gammas, cps
    per_pair = inner_points**2

    def fits(n_cp, n_gamma):
        return n_cp * n_gamma * per_pair <= budget // 2

    cp_choice = cps[:1]
    for stride in range(1, len(cps)):
        if fits(len(_strided(cps, stride)), len(gammas)):
            cp_choice = _strided(cps, stride)
            break
    for stride in range(1, len(gammas) + 1):
        g_choice = _strided(gammas, stride)
        if fits(len(cp_choice), len(g_choice)):
            return g_choice, cp_choice
    raise ValueError(
        f"budget {budget} cannot cover the coarse grid ({2 * 2 * per_pair} evaluations needed)"
    )


class _Search:
    def __init__(self, ts: TrialSet, target: float, gammas):
        self.ts = ts
        self.target = target
        self.gammas = np.asarray(gammas)
        self.rows: list[tuple] = []

    def probe_all(self, theta: float, rho: float, cp: int, stage: str):
        c = self.ts.gamma_curves(theta, rho, cp)
        ok = is_feasible(c["mean_energy"], c["stderr_energy"], self.target)
        for g in self.gammas:
            self.rows.append(
                (rho, int(g), theta, cp, c["mean_secrecy"][g], c["stderr_secrecy"][g],
                 c["mean_energy"][g], c["stderr_energy"][g], bool(ok[g]), stage)
            )
        return c, ok

    def probe(self, theta: float, rho: float, gamma: int, cp: int):
        c = self.ts.gamma_curves(theta, rho, cp)
        ok = bool(is_feasible(c["mean_energy"][gamma], c["stderr_energy"][gamma], self.target))
        obj = float(c["mean_secrecy"][gamma])
        self.rows.append(
            (rho, gamma, theta, cp, obj, c["stderr_secrecy"][gamma],
             c["mean_energy"][gamma], c["stderr_energy"][gamma], ok, "refine")
        )
        return obj, ok


def _compass(search: _Search, gamma: int, cp: int, start, step: float, max_evals: int, min_step: float):
    """Feasibility-filter compass search over (rho, theta) in the unit square."""
    rho, theta, best = start
    evals = 0
    while step >= min_step and evals < max_evals:
        improved = False
        for d_rho, d_theta in ((step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)):
            r = min(max(rho + d_rho, 0.0), 1.0)
            t = min(max(theta + d_theta, 0.0), 1.0)
            if (r, t) == (rho, theta):
                continue
            obj, ok = search.probe(t, r, gamma, cp)
            evals += 1
            if ok and obj > best:
                rho, theta, best = r, t, obj
                improved = True
                break
            if evals >= max_evals:
                break
        if not improved:
            step /= 2.0
    return evals


def optimize(
    cfg: SystemConfig,
    seed: int,
    n_trials: int,
    budget: int | None = None,
    target_energy: float | None = None,
    inner_points: int = 9,
    refine_per_cp: int = 3,
    refine_evals: int = 48,
    cp_lengths=None,
    trial_set: TrialSet | None = None,
) -> OptimizationResult:
    """Maximise the mean secrecy rate subject to the mean-energy target.

    Parameters
    ----------
    budget : int, optional
        Maximum number of policy evaluations. Half is reserved for the seed
        grid, the rest for refinement. ``None`` searches the full integer grid.
    target_energy : float, optional
        Energy target in J/slot; defaults to ``cfg.target_energy``.
    inner_points : int
        Points per axis of the ``(rho, theta)`` seed grid.
    trial_set : TrialSet, optional
        Reuse already-built channel draws (must match ``cfg``, ``seed`` and
        ``n_trials``).
    """
    zeta = cfg.target_energy if target_energy is None else float(target_energy)
    if zeta < 0:
        raise ConfigError("target_energy must be >= 0")
    if inner_points < 2:
        raise ValueError("inner_points must be >= 2")
    gammas, cps = plan_grid(cfg, budget, inner_points, cp_lengths)
    ts = trial_set if trial_set is not None else TrialSet(cfg, seed, 0, n_trials)
    search = _Search(ts, zeta, gammas)
    axis = np.linspace(0.0, 1.0, inner_points)
    grid_evals = len(cps) * len(gammas) * inner_points**2
    spare = None if budget is None else budget - grid_evals

    for cp in cps:
        best_here = {}
        for theta in axis:
            for rho in axis:
                c, ok = search.probe_all(float(theta), float(rho), cp, "grid")
                for g in gammas:
                    if not ok[g]:
                        continue
                    # objective first, then larger rho, then smaller theta
                    key = (-float(c["mean_secrecy"][g]), -float(rho), float(theta))
                    if g not in best_here or key < best_here[g]:
                        best_here[g] = key
        ranked = sorted((key, g) for g, key in best_here.items())
        for (neg_obj, neg_rho, theta), g in ranked[:refine_per_cp]:
            cap = refine_evals
            if spare is not None:
                cap = min(cap, spare)
                if cap <= 0:
                    break
            used = _compass(search, g, cp, (-neg_rho, theta, -neg_obj),
                            step=0.5 / (inner_points - 1), max_evals=cap, min_step=1e-3)
            if spare is not None:
                spare -= used
        if trial_set is None:
            ts.drop(cp)

    trace = np.array(search.rows, dtype=TRACE_DTYPE)
    feasible_rows = trace[trace["feasible"]]
    if feasible_rows.size:
        best = min(feasible_rows, key=_rank_key)
        feasible, message = True, ""
    else:
        best = trace[np.argmax(trace["mean_energy"])]
        feasible, message = False, INFEASIBLE_ADVICE
    policy = PolicyParams(theta=float(best["theta"]), rho=float(best["rho"]),
                          gamma=int(best["gamma"]), cp_length=int(best["n_cp"]))
    return OptimizationResult(
        best_policy=policy,
        best_objective=float(best["mean_secrecy"]),
        constraint_value=float(best["mean_energy"]),
        constraint_stderr=float(best["stderr_energy"]),
        feasible=feasible,
        evaluations=int(trace.size),
        target_energy=zeta,
        seed=int(seed),
        n_trials=int(ts.n_trials),
        search_trace=trace,
        message=message,
    )


def min_gamma_for_energy(
    cfg: SystemConfig,
    rho: float,
    theta: float,
    cp_length: int,
    target_energy: float,
    seed: int,
    n_trials: int,
    trial_set: TrialSet | None = None,
) -> int | None:
    """Smallest ``gamma`` whose mean harvested energy reaches the target.

    Relies on the energy being non-decreasing in ``gamma`` and bisects.
    Returns ``None`` when even ``gamma = N`` falls short.
    """
    ts = trial_set if trial_set is not None else TrialSet(cfg, seed, 0, n_trials)

    def enough(g: int) -> bool:
        pol = PolicyParams(theta=theta, rho=rho, gamma=g, cp_length=cp_length)
        return ts.estimate(pol).mean_energy >= target_energy

    lo, hi = 0, cfg.n_subchannels
    if enough(lo):
        return 0
    if not enough(hi):
        return None
    # invariant: enough(hi) and not enough(lo)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if enough(mid):
            hi = mid
        else:
            lo = mid
    return hi

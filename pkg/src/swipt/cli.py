"""``swipt`` command-line front end.

Config files are flat ``key = value`` text (``#`` comments allowed). Keys are
the :class:`RunConfig` field names plus the :class:`SystemConfig` fields.
Policy ranges accept comma lists (``rho = 0.2, 0.8``) or inclusive integer
ranges ``start:stop[:step]`` (``gamma = 0:64``).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import itertools
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from .channel import draw_channels, write_channel_dump
from .config import ConfigError, PolicyParams, SystemConfig
from .montecarlo import sweep
from .optimizer import TRACE_DTYPE, optimize
from .verify import run_checks

COMMANDS = ("sweep", "estimate", "optimize", "verify")

SWEEP_COLUMNS = (
    "rho", "gamma", "theta", "n_cp",
    "mean_secrecy", "stderr_secrecy",
    "mean_energy_total", "mean_energy_cp", "mean_energy_gamma", "stderr_energy",
    "n_trials", "seed",
)
OPTIMIZE_COLUMNS = (
    "rho", "gamma", "theta", "n_cp",
    "best_objective", "constraint_value", "constraint_stderr", "feasible",
    "evaluations", "target_energy", "n_trials", "seed",
)

EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_CHECK_FAILED = 1

_SYSTEM_KEYS = {f.name for f in fields(SystemConfig)}


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig
    rho: tuple = (1.0,)
    gamma: tuple = (0,)
    theta: tuple = (0.5,)
    n_cp: tuple = ()
    seed: int = 0
    n_trials: int = 2000
    out: str | None = None
    format: str = "csv"
    command: str | None = None
    workers: int = 1
    budget: int | None = None
    strict: bool = False
    dump_channels: str | None = None

    def policies(self) -> list[PolicyParams]:
        cps = self.n_cp or (self.system.cp_length,)
        grid = itertools.product(sorted(self.rho), sorted(self.gamma), sorted(self.theta), sorted(cps))
        return [PolicyParams(theta=t, rho=r, gamma=g, cp_length=c) for r, g, t, c in grid]

    def validate(self) -> None:
        cfg = self.system
        for name in ("rho", "theta"):
            for v in getattr(self, name):
                if not 0.0 <= v <= 1.0:
                    raise ConfigError(f"{name}={v} violates 0 <= {name} <= 1")
        for g in self.gamma:
            if not 0 <= g <= cfg.n_subchannels:
                raise ConfigError(f"gamma={g} violates 0 <= gamma <= n_subchannels={cfg.n_subchannels}")
        for c in self.n_cp:
            if not cfg.delay_spread_bob <= c <= cfg.n_subchannels:
                raise ConfigError(
                    f"n_cp={c} violates delay_spread_bob={cfg.delay_spread_bob} <= n_cp "
                    f"<= n_subchannels={cfg.n_subchannels}"
                )
            if cfg.delay_spread_eve > c + 1:
                raise ConfigError(f"n_cp={c} violates delay_spread_eve <= n_cp + 1")
        if self.n_trials < 1:
            raise ConfigError("n_trials must be >= 1")
        if self.format not in ("csv", "jsonl"):
            raise ConfigError(f"format must be csv or jsonl, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def parse_range(text: str, kind=float) -> tuple:
    text = text.strip()
    if not text:
        raise ConfigError("empty range")
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise ConfigError(f"bad range {text!r}")
        start, stop = parts[:2]
        step = parts[2] if len(parts) == 3 else 1
        if step <= 0:
            raise ConfigError(f"range step must be positive in {text!r}")
        values = tuple(range(start, stop + 1, step))
        if not values:
            raise ConfigError(f"empty range {text!r}")
        return tuple(kind(v) for v in values)
    values = [p.strip() for p in text.split(",") if p.strip()]
    if not values:
        raise ConfigError("empty range")
    if kind is int:
        out = []
        for v in values:
            f = float(v)
            if f != int(f):
                raise ConfigError(f"{v} is not an integer")
            out.append(int(f))
        return tuple(out)
    return tuple(kind(v) for v in values)


def _parse_bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


def load_config(path) -> dict[str, str]:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    text = Path(path).read_text(encoding="utf-8")
    parser.read_string("[run]\n" + text)
    return dict(parser["run"])


def build_run_config(raw: dict[str, str], overrides: dict | None = None) -> RunConfig:
    raw = dict(raw)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    sys_kwargs = {}
    defaults = SystemConfig()
    for key in _SYSTEM_KEYS:
        if key in raw:
            current = getattr(defaults, key)
            value = raw.pop(key).strip()
            if isinstance(current, str):
                sys_kwargs[key] = value
            elif isinstance(current, int) and not isinstance(current, bool):
                sys_kwargs[key] = int(value)
            else:
                sys_kwargs[key] = float(value)
    system = SystemConfig(**sys_kwargs)
    kwargs: dict = {"system": system}
    for key, kind in (("rho", float), ("gamma", int), ("theta", float), ("n_cp", int)):
        if key in raw:
            kwargs[key] = parse_range(raw.pop(key), kind)
    for key, kind in (("seed", int), ("n_trials", int), ("workers", int), ("budget", int)):
        if key in raw:
            value = raw.pop(key).strip()
            kwargs[key] = int(value) if value else None
    for key in ("out", "format", "command", "dump_channels"):
        if key in raw:
            kwargs[key] = raw.pop(key).strip() or None
    if "strict" in raw:
        kwargs["strict"] = _parse_bool(raw.pop("strict"))
    if raw:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(raw))}")
    kwargs.update(overrides)
    run = RunConfig(**kwargs)
    run.validate()
    return run


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sweep_row(res) -> dict:
    return {
        "rho": res.policy.rho,
        "gamma": res.policy.gamma,
        "theta": res.policy.theta,
        "n_cp": res.policy.cp_length,
        "mean_secrecy": res.mean_secrecy,
        "stderr_secrecy": res.stderr_secrecy,
        "mean_energy_total": res.mean_energy,
        "mean_energy_cp": res.mean_energy_cp,
        "mean_energy_gamma": res.mean_energy_gamma,
        "stderr_energy": res.stderr_energy,
        "n_trials": res.n_trials,
        "seed": res.seed,
    }


def render_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def render_jsonl(objects) -> str:
    return "".join(json.dumps(o, allow_nan=False) + "\n" for o in objects)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def trace_path(out: str) -> str:
    p = Path(out)
    return str(p.with_name(p.stem + ".trace.csv"))


def cmd_sweep(run: RunConfig, single: bool = False) -> int:
    policies = run.policies()
    if single and len(policies) != 1:
        raise ConfigError(f"estimate needs exactly one policy, config gives {len(policies)}")
    if run.dump_channels:
        sysc = run.system
        write_channel_dump(
            run.dump_channels,
            draw_channels(run.seed, range(run.n_trials), sysc.delay_spread_bob, sysc.delay_spread_eve),
        )
    results = sweep(policies, run.system, run.seed, run.n_trials, run.workers)
    if run.format == "csv":
        text = render_csv([_sweep_row(r) for r in results], SWEEP_COLUMNS)
    else:
        text = render_jsonl([r.to_dict() for r in results])
    _emit(text, run.out)
    return 0


def cmd_optimize(run: RunConfig) -> int:
    result = optimize(
        run.system,
        run.seed,
        run.n_trials,
        budget=run.budget,
        cp_lengths=run.n_cp or None,
    )
    record = result.to_dict()
    if run.format == "csv":
        row = dict(record["best_policy"], **{k: v for k, v in record.items() if k != "best_policy"})
        text = render_csv([row], OPTIMIZE_COLUMNS)
    else:
        text = render_jsonl([record])
    _emit(text, run.out)
    if run.out is not None:
        trace_rows = [dict(zip(TRACE_DTYPE.names, r.tolist())) for r in result.search_trace]
        Path(trace_path(run.out)).write_text(
            render_csv(trace_rows, TRACE_DTYPE.names), encoding="utf-8", newline=""
        )
    if not result.feasible:
        print(
            f"infeasible: best probed mean energy {result.constraint_value:.6g} J/slot "
            f"< target {result.target_energy:.6g}; {result.message}",
            file=sys.stderr,
        )
        return EXIT_INFEASIBLE if run.strict else 0
    return 0


def cmd_verify(run: RunConfig, inject_fault: bool = False) -> int:
    checks = run_checks(run.system, seed=run.seed, n_draws=min(run.n_trials, 1000), inject_fault=inject_fault)
    lines = [c.line() for c in checks]
    failed = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - failed}/{len(checks)} checks passed")
    _emit("\n".join(lines) + "\n", run.out)
    return 0 if failed == 0 else EXIT_CHECK_FAILED


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="swipt", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, dest="n_trials")
    p.add_argument("--workers", type=int)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--budget", type=int, help="optimize: max policy evaluations")
    p.add_argument("--strict", action="store_true", default=None,
                   help="optimize: exit nonzero when infeasible")
    p.add_argument("--dump-channels", dest="dump_channels",
                   help="sweep/estimate: write the channel draws as JSON lines")
    p.add_argument("--inject-fault", action="store_true",
                   help="verify: corrupt one precoder entry (self-test)")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        raw = load_config(args.config) if args.config else {}
        if args.command == "optimize" and "target_energy" not in raw:
            raise ConfigError("optimize needs target_energy in the config")
        overrides = {k: getattr(args, k) for k in
                     ("out", "seed", "n_trials", "workers", "format", "budget", "strict", "dump_channels")}
        overrides["command"] = args.command
        run = build_run_config(raw, overrides)
        if args.command in ("sweep", "estimate"):
            return cmd_sweep(run, single=args.command == "estimate")
        if args.command == "optimize":
            return cmd_optimize(run)
        return cmd_verify(run, inject_fault=args.inject_fault)
    except (ConfigError, ValueError, configparser.Error) as exc:
        print(f"swipt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"swipt: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

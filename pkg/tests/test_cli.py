import csv
import json
from pathlib import Path

import pytest

from swipt.channel import read_channel_dump
from swipt.cli import EXIT_CHECK_FAILED, EXIT_INFEASIBLE, EXIT_USAGE, SWEEP_COLUMNS, main, parse_range, trace_path
from swipt.config import ConfigError

DATA = Path(__file__).parent / "data"

SMALL = """\
n_subchannels = 8
cp_length = 3
total_power = 100
delay_spread_bob = 3
delay_spread_eve = 3
theta = 0.5
seed = 3
n_trials = 20
"""


def write_cfg(tmp_path, extra="", name="run.cfg"):
    path = tmp_path / name
    path.write_text(SMALL + extra, encoding="utf-8")
    return str(path)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_golden_sweep(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", str(DATA / "small_sweep.cfg"), "--out", str(out)]) == 0
    golden = (DATA / "small_sweep_golden.csv").read_text(encoding="utf-8").splitlines()
    got = out.read_text(encoding="utf-8").splitlines()
    assert got[0] == ",".join(SWEEP_COLUMNS) == golden[0]
    assert len(got) == len(golden)
    for g_line, o_line in zip(golden[1:], got[1:]):
        for g, o in zip(g_line.split(","), o_line.split(",")):
            assert float(o) == pytest.approx(float(g), rel=1e-12, abs=1e-18)


def test_sweep_rows_ordered_and_full_precision(tmp_path):
    out = tmp_path / "s.csv"
    cfg = write_cfg(tmp_path, "rho = 0.8, 0.2\ngamma = 8, 0, 4\n")
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = read_csv(out)
    keys = [(float(r["rho"]), int(r["gamma"])) for r in rows]
    assert keys == sorted(keys) and len(rows) == 6
    assert all(r["n_trials"] == "20" and r["seed"] == "3" for r in rows)
    # shortest round-trip repr: parsing the text recovers the double exactly
    for row in rows:
        for col in ("mean_secrecy", "stderr_secrecy", "mean_energy_total"):
            assert repr(float(row[col])) == row[col]


def test_sweep_reruns_are_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path, "rho = 0.2, 0.8\ngamma = 0:8\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--config", cfg, "--out", str(a), "--trials", "600"]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(b), "--trials", "600", "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_overrides(tmp_path):
    out = tmp_path / "o.csv"
    cfg = write_cfg(tmp_path)
    assert main(["sweep", "--config", cfg, "--out", str(out), "--seed", "9", "--trials", "4"]) == 0
    row = read_csv(out)[0]
    assert row["seed"] == "9" and row["n_trials"] == "4"


@pytest.mark.parametrize(
    "extra, needle",
    [
        ("gamma = 5:2\n", "empty range"),
        ("gamma = \n", "empty range"),
        ("gamma = 9\n", "gamma=9"),
        ("rho = 1.5\n", "rho=1.5"),
        ("n_cp = 2\n", "n_cp=2"),
        ("colour = red\n", "unknown config keys"),
        ("format = xml\n", "format"),
    ],
)
def test_bad_config_is_usage_error(tmp_path, capsys, extra, needle):
    cfg = write_cfg(tmp_path, extra)
    assert main(["sweep", "--config", cfg]) == EXIT_USAGE
    assert needle in capsys.readouterr().err


def test_duplicate_key_is_usage_error(tmp_path):
    assert main(["sweep", "--config", write_cfg(tmp_path, "seed = 4\n")]) == EXIT_USAGE


def test_missing_config_file(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "nope.cfg")]) == EXIT_USAGE


def test_unwritable_output(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "missing" / "x.csv")]) == EXIT_USAGE


def test_estimate_and_jsonl(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "rho = 0.3\ngamma = 2\n")
    assert main(["estimate", "--config", cfg, "--format", "jsonl"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1
    rec = json.loads(lines[0])
    assert rec["gamma"] == 2 and rec["rho"] == 0.3 and rec["n_trials"] == 20
    many = write_cfg(tmp_path, "gamma = 1, 2\n", name="many.cfg")
    assert main(["estimate", "--config", many]) == EXIT_USAGE


def test_dump_channels(tmp_path):
    dump = tmp_path / "ch.jsonl"
    cfg = write_cfg(tmp_path)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "s.csv"), "--dump-channels", str(dump)]) == 0
    chans = list(read_channel_dump(dump))
    assert len(chans) == 20 and chans[0].seed == 3 and chans[0].taps_bob.size == 3


def test_verify_passes_and_fault_is_caught(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert main(["verify", "--config", cfg]) == 0
    report = capsys.readouterr().out
    assert "FAIL" not in report and "oracle_rate_eve" in report
    assert main(["verify", "--config", cfg, "--inject-fault"]) == EXIT_CHECK_FAILED
    report = capsys.readouterr().out
    assert "FAIL  an_cancellation" in report


def test_optimize_slack_target(tmp_path):
    out = tmp_path / "opt.csv"
    cfg = write_cfg(tmp_path, "target_energy = 0\nn_cp = 3\n")
    assert main(["optimize", "--config", cfg, "--out", str(out)]) == 0
    row = read_csv(out)[0]
    assert row["gamma"] == "0" and row["feasible"] == "true"
    assert Path(trace_path(str(out))).exists()


def test_optimize_infeasible(tmp_path, capsys):
    out = tmp_path / "opt.jsonl"
    cfg = write_cfg(tmp_path, "target_energy = 1e9\nn_cp = 3\n")
    assert main(["optimize", "--config", cfg, "--out", str(out), "--format", "jsonl"]) == 0
    rec = json.loads(out.read_text())
    assert rec["feasible"] is False
    assert "lower target_energy" in capsys.readouterr().err
    assert main(["optimize", "--config", cfg, "--out", str(out), "--strict"]) == EXIT_INFEASIBLE


def test_optimize_needs_target(tmp_path):
    assert main(["optimize", "--config", write_cfg(tmp_path)]) == EXIT_USAGE


def test_parse_range():
    assert parse_range("0:4", int) == (0, 1, 2, 3, 4)
    assert parse_range("0:10:5", int) == (0, 5, 10)
    assert parse_range("0.2, 0.8") == (0.2, 0.8)
    with pytest.raises(ConfigError):
        parse_range("1.5", int)
    with pytest.raises(ConfigError):
        parse_range("0:4:0", int)

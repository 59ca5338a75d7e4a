import csv
import os
import subprocess
import sys
from pathlib import Path

import pytest

from hammerlab.cli import ConfigError, fmt6, load_config, main, sci_if_tiny

RECIPES = Path(__file__).resolve().parent.parent / "recipes"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


TINY_SIM = """
[sim]
rh_th = 64
trials = 50
seed = 5

[tracker.mint]
kind = mint
k = 1

[attack.hammer]
kind = single_target
acts_per_trefi = 36
rh_th = 64
"""

TINY_FAILPROB = """
[sim]
rh_th = 16
trials = 400
seed = 9

[sweep]
n = 18 73
a = 1

[sampler.m]
kind = mint
k = 1

[sampler.r]
kind = reservoir
k = 1
"""

TINY_AREA = """
[sweep]
rh_th = 4800

[area.ss]
algorithm = space_saving
storage = sram
technology = logic

[area.bad]
algorithm = countmin
storage = dram
technology = memory
cms_width = 128
cms_depth = 4
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_simulate_round_trip(tmp_path):
    cfg = write(tmp_path, "sim.cfg", TINY_SIM)
    out = str(tmp_path / "out.csv")
    assert main(["simulate", "--config", cfg, "--out", out]) == 0
    rows = read_csv(out)
    assert len(rows) == 1
    row = rows[0]
    assert row["tracker"] == "mint" and row["attack"] == "hammer"
    assert 0.2 <= float(row["success_rate"]) <= 0.7  # (72/73)^64 ~ 0.41
    assert row["mitigations_on_target"] != ""


def test_byte_identical_reruns(tmp_path):
    cfg = write(tmp_path, "sim.cfg", TINY_SIM)
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["simulate", "--config", cfg, "--out", a]) == 0
    assert main(["simulate", "--config", cfg, "--out", b]) == 0
    assert Path(a).read_bytes() == Path(b).read_bytes()


def test_jobs_flag_preserves_order_and_bytes(tmp_path):
    cfg = write(tmp_path, "fp.cfg", TINY_FAILPROB)
    a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    assert main(["failprob", "--config", cfg, "--out", a, "--jobs", "1"]) == 0
    assert main(["failprob", "--config", cfg, "--out", b, "--jobs", "4"]) == 0
    assert Path(a).read_bytes() == Path(b).read_bytes()


def test_failprob_mint_equals_reservoir_at_full_rate(tmp_path):
    cfg = write(tmp_path, "fp.cfg", TINY_FAILPROB)
    out = str(tmp_path / "fp.csv")
    assert main(["failprob", "--config", cfg, "--out", out]) == 0
    rows = read_csv(out)
    at73 = {r["kind"]: r["analytic"] for r in rows if r["acts_per_trefi"] == "73"}
    assert at73["mint"] == at73["reservoir"]


def test_area_skips_unsupported_with_note(tmp_path):
    cfg = write(tmp_path, "area.cfg", TINY_AREA)
    out = str(tmp_path / "area.csv")
    assert main(["area", "--config", cfg, "--out", out]) == 0
    rows = read_csv(out)
    ss = [r for r in rows if r["algorithm"] == "space_saving"][0]
    assert abs(float(ss["area_um2"]) - 492.39) < 1.0
    bad = [r for r in rows if r["algorithm"] == "countmin"][0]
    assert bad["area_um2"] == "" and "per-row counting" in bad["note"]


def test_area_empty_sweep_header_only(tmp_path):
    cfg = write(tmp_path, "area.cfg", "[area.ss]\nalgorithm = space_saving\n[sweep]\nrh_th =\n")
    out = str(tmp_path / "area.csv")
    assert main(["area", "--config", cfg, "--out", out]) == 2  # empty axis is a config error


def test_attack_emits_parseable_stream(tmp_path):
    cfg = write(tmp_path, "atk.cfg", "[attack.t]\nkind = ss_thrash\ntable_capacity = 4\nreps = 2\n")
    out = str(tmp_path / "s.txt")
    assert main(["attack", "--config", cfg, "--out", out]) == 0
    from hammerlab.model import ActivationStream

    s = ActivationStream.from_text(Path(out).read_text())
    assert len(s) == 10


def test_config_errors_exit_2(tmp_path):
    p = write(tmp_path, "bad.cfg", "[tracker.x]\ncapacity = 4\n")  # missing kind
    assert main(["simulate", "--config", p, "--out", str(tmp_path / "o.csv")]) == 2

    p = write(tmp_path, "bad2.cfg", "[sim]\nrh_th = banana\n")
    assert main(["simulate", "--config", p, "--out", str(tmp_path / "o.csv")]) == 2

    p = write(tmp_path, "bad3.cfg", "not ini at all\n")
    assert main(["area", "--config", p, "--out", str(tmp_path / "o.csv")]) == 2

    assert main(["simulate", "--config", str(tmp_path / "missing.cfg"),
                 "--out", str(tmp_path / "o.csv")]) == 2

    p = write(tmp_path, "bad4.cfg", TINY_SIM + "\n[sweep]\nn = \n")
    assert main(["simulate", "--config", p, "--out", str(tmp_path / "o.csv")]) == 2


def test_runtime_errors_exit_1(tmp_path):
    cfg = write(tmp_path, "sim.cfg", TINY_SIM)
    missing_dir = str(tmp_path / "nope" / "out.csv")
    assert main(["simulate", "--config", cfg, "--out", missing_dir]) == 1


def test_seed_precedence_env_fallback(tmp_path, monkeypatch):
    cfg = write(tmp_path, "fp.cfg", TINY_FAILPROB.replace("seed = 9\n", ""))
    monkeypatch.setenv("HAMMERLAB_SEED", "123")
    loaded = load_config(cfg, None, None)
    assert loaded.seed == 123
    loaded = load_config(cfg, 77, None)
    assert loaded.seed == 77


def test_trials_override(tmp_path):
    cfg = write(tmp_path, "fp.cfg", TINY_FAILPROB)
    loaded = load_config(cfg, None, 12)
    assert loaded.trials == 12


def test_formatting_helpers():
    assert fmt6(0.123456789) == "0.123457"
    assert sci_if_tiny(0.5) == ""
    assert sci_if_tiny(3.2e-9) == "3.200000e-09"
    assert sci_if_tiny(0.0) == ""


def test_bundled_recipes_parse():
    for name in ("dsac.cfg", "thrash.cfg", "area.cfg", "failprob.cfg"):
        loaded = load_config(str(RECIPES / name), None, None)
        assert loaded.timing.t_rc == 48


def test_cli_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "hammerlab.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "simulate" in proc.stdout

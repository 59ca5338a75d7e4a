"""Batch experiment runner: simulate / area / failprob / attack.

Experiments are described by INI-style config files (`key = value` lines
under [section] headers, `#` comments) and emit CSV.  Reruns with the
same seed are byte-identical.  Exit codes: 0 success, 1 runtime failure,
2 config error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .adversaries import AttackSpec, attack_from_config
from .analysis import (
    EXCLUDED_FROM_SWEEPS,
    UnsupportedCombination,
    area_estimate,
    sampler_failure_analytic,
)
from .model import BankGeometry, TimingParams, max_acts_per_trefi
from .sim import SimConfig, attack_success_probability, run, sampler_failure_mc, trial_rng
from .trackers import tracker_from_config

SEED_ENV = "HAMMERLAB_SEED"


class ConfigError(Exception):
    pass


def fmt6(x: float) -> str:
    return f"{x:.6g}"


def sci_if_tiny(x: float) -> str:
    """Scientific-notation companion column for sub-1e-6 probabilities."""
    return f"{x:.6e}" if 0 < x < 1e-6 else ""


def _int_list(raw: str, where: str) -> list[int]:
    try:
        return [int(tok) for tok in raw.replace(",", " ").split()]
    except ValueError as e:
        raise ConfigError(f"{where}: expected integers, got {raw!r}") from e


@dataclass
class ExperimentConfig:
    timing: TimingParams
    geometry: BankGeometry
    rh_th: int
    mitigations_per_ref: int
    table_reset: str
    target_threshold_rule: str
    seed: int
    trials: int
    trackers: dict[str, dict] = field(default_factory=dict)
    attacks: dict[str, AttackSpec] = field(default_factory=dict)
    samplers: dict[str, dict] = field(default_factory=dict)
    area_configs: dict[str, dict] = field(default_factory=dict)
    sweep: dict[str, list[int]] = field(default_factory=dict)

    def sim_config(self, rh_th: int | None = None, seed: int | None = None) -> SimConfig:
        return SimConfig(
            timing=self.timing,
            rh_th=self.rh_th if rh_th is None else rh_th,
            mitigations_per_ref=self.mitigations_per_ref,
            table_reset=self.table_reset,
            target_threshold_rule=self.target_threshold_rule,
            seed=self.seed if seed is None else seed,
        )


def load_config(path: str, seed_override: int | None, trials_override: int | None) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        with open(path) as fh:
            parser.read_file(fh, source=path)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except configparser.Error as e:
        raise ConfigError(str(e)) from e

    def section(name) -> dict:
        return dict(parser[name]) if parser.has_section(name) else {}

    def get_int(sec: dict, key: str, default: int, where: str) -> int:
        try:
            return int(sec.get(key, default))
        except ValueError as e:
            raise ConfigError(f"[{where}] {key}: not an integer ({sec.get(key)!r})") from e

    t = section("timing")
    try:
        timing = TimingParams(
            t_rc=get_int(t, "t_rc", 48, "timing"),
            t_refi=get_int(t, "t_refi", 3_900, "timing"),
            t_refw=get_int(t, "t_refw", 32_000_000, "timing"),
            t_rfc=get_int(t, "t_rfc", 350, "timing"),
            refs_per_window=get_int(t, "refs_per_window", 8192, "timing"),
        )
        geometry = BankGeometry(get_int(section("geometry"), "rows_per_bank", 131_072, "geometry"))
    except ValueError as e:
        raise ConfigError(f"[timing/geometry]: {e}") from e

    s = section("sim")
    if seed_override is not None:
        seed = seed_override
    elif "seed" in s:
        seed = get_int(s, "seed", 0, "sim")
    else:
        seed = int(os.environ.get(SEED_ENV, "0"))
    cfg = ExperimentConfig(
        timing=timing,
        geometry=geometry,
        rh_th=get_int(s, "rh_th", 4800, "sim"),
        mitigations_per_ref=get_int(s, "mitigations_per_ref", 1, "sim"),
        table_reset=s.get("table_reset", "none"),
        target_threshold_rule=s.get("target_threshold_rule", "quarter"),
        seed=seed,
        trials=trials_override if trials_override is not None else get_int(s, "trials", 1, "sim"),
    )
    if cfg.table_reset not in ("none", "per_window"):
        raise ConfigError(f"[sim] table_reset: unknown value {cfg.table_reset!r}")
    if cfg.target_threshold_rule not in ("quarter", "half"):
        raise ConfigError(f"[sim] target_threshold_rule: unknown value {cfg.target_threshold_rule!r}")

    for name in sorted(parser.sections()):
        body = dict(parser[name])
        try:
            if name.startswith("tracker."):
                if "kind" not in body:
                    raise ConfigError(f"[{name}]: missing 'kind'")
                cfg.trackers[name.split(".", 1)[1]] = body
            elif name.startswith("attack."):
                cfg.attacks[name.split(".", 1)[1]] = attack_from_config(body, timing, geometry)
            elif name.startswith("sampler."):
                if body.get("kind") not in ("mint", "reservoir", "para"):
                    raise ConfigError(f"[{name}] kind: must be mint, reservoir, or para")
                cfg.samplers[name.split(".", 1)[1]] = body
            elif name.startswith("area."):
                cfg.area_configs[name.split(".", 1)[1]] = body
        except ConfigError:
            raise
        except (ValueError, KeyError) as e:
            raise ConfigError(f"[{name}]: {e}") from e

    sw = section("sweep")
    for axis in ("rh_th", "n", "a"):
        if axis in sw:
            values = _int_list(sw[axis], f"[sweep] {axis}")
            if not values:
                raise ConfigError(f"[sweep] {axis}: empty axis")
            cfg.sweep[axis] = values
    return cfg


def _point_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence([master, index]).generate_state(1, np.uint64)[0])


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


# -- simulate ----------------------------------------------------------------

SIM_HEADER = [
    "run_id", "tracker", "attack", "rh_th", "acts_per_trefi", "target_acts",
    "success_rate", "success_rate_sci", "ci_low", "ci_high",
    "total_mitigations", "mitigations_on_target", "max_unmitigated",
]


def _simulate_point(args) -> list:
    (run_id, tracker_name, tracker_cfg, attack_name, attack, rh_th, n, a,
     exp_seed, point_seed, trials, base) = args
    if attack.kind == "single_target":
        attack = replace(attack, acts_per_trefi=n, target_acts_per_trefi=a, rh_th=rh_th)
    config = SimConfig(
        timing=base.timing, rh_th=rh_th, mitigations_per_ref=base.mitigations_per_ref,
        table_reset=base.table_reset, target_threshold_rule=base.target_threshold_rule,
        seed=point_seed,
    )
    est = attack_success_probability(attack, tracker_cfg, config, trials, attack.target_row)
    tracker = tracker_from_config(
        dict(tracker_cfg), rng=trial_rng(point_seed, 0), max_slots=max_acts_per_trefi(base.timing)
    )
    report = run(attack.build(), tracker, config, target_row=attack.target_row)
    return [
        run_id, tracker_name, attack_name, rh_th,
        n if n is not None else "", a,
        fmt6(est.rate), sci_if_tiny(est.rate), fmt6(est.ci_low), fmt6(est.ci_high),
        report.total_mitigations, report.mitigations_on_target,
        report.max_count(attack.target_row),
    ]


def cmd_simulate(cfg: ExperimentConfig, out: str, jobs: int) -> None:
    if not cfg.trackers:
        raise ConfigError("simulate needs at least one [tracker.*] section")
    if not cfg.attacks:
        raise ConfigError("simulate needs at least one [attack.*] section")
    rh_list = cfg.sweep.get("rh_th", [cfg.rh_th])
    points = []
    run_id = 0
    for tracker_name, tracker_cfg in sorted(cfg.trackers.items()):
        for attack_name, attack in sorted(cfg.attacks.items()):
            if attack.kind == "single_target":
                n_list = cfg.sweep.get("n", [attack.acts_per_trefi])
                a_list = cfg.sweep.get("a", [attack.target_acts_per_trefi])
            else:
                # n/a axes only parameterize the single-target attack
                n_list = [attack.acts_per_trefi]
                a_list = [attack.target_acts_per_trefi]
            for rh_th in rh_list:
                for n in n_list:
                    for a in a_list:
                        points.append((
                            run_id, tracker_name, tracker_cfg, attack_name, attack,
                            rh_th, n, a, cfg.seed, _point_seed(cfg.seed, run_id),
                            cfg.trials, cfg,
                        ))
                        run_id += 1
    rows = _map_points(_simulate_point, points, jobs)
    _write_csv(out, SIM_HEADER, rows)


# -- area --------------------------------------------------------------------

AREA_HEADER = [
    "algorithm", "storage", "technology", "rh_th",
    "entries", "bits_per_entry", "total_bits", "area_um2", "note",
]


def cmd_area(cfg: ExperimentConfig, out: str, jobs: int) -> None:
    if not cfg.area_configs:
        raise ConfigError("area needs at least one [area.*] section")
    rh_list = cfg.sweep.get("rh_th", [cfg.rh_th])
    rows = []
    for rh_th in rh_list:
        for name, spec in sorted(cfg.area_configs.items()):
            algorithm = spec.get("algorithm", name)
            storage = spec.get("storage", "sram")
            technology = spec.get("technology", "logic")
            shape = None
            if "cms_width" in spec or "cms_depth" in spec:
                shape = (int(spec["cms_width"]), int(spec["cms_depth"]))
            try:
                est = area_estimate(
                    algorithm, rh_th, storage, technology,
                    cfg.geometry, cfg.timing, shape, float(spec.get("delta", "0.1")),
                )
            except (UnsupportedCombination, ValueError) as e:
                print(f"warning: skipping {name} at rh_th={rh_th}: {e}", file=sys.stderr)
                rows.append([algorithm, storage, technology, rh_th, "", "", "", "", str(e)])
                continue
            if algorithm in EXCLUDED_FROM_SWEEPS and spec.get("force", "").lower() not in ("1", "true"):
                rows.append([algorithm, storage, technology, rh_th, "", "", "", "",
                             "excluded from default sweeps (1/eps^2 family); set force=true"])
                continue
            rows.append([
                est.algorithm, est.storage, est.technology, est.rh_th,
                est.entries, est.bits_per_entry, est.total_bits, fmt6(est.area_um2), "",
            ])
    _write_csv(out, AREA_HEADER, rows)


# -- failprob ----------------------------------------------------------------

FAILPROB_HEADER = [
    "sampler", "kind", "rh_th", "acts_per_trefi", "target_acts", "k",
    "analytic", "analytic_sci", "mc_rate", "ci_low", "ci_high", "trials",
]


def _failprob_point(args) -> list:
    name, body, rh_th, n, a, seed, trials, max_slots = args
    kind = body["kind"]
    k = int(body.get("k", "1"))
    p = float(body.get("p", "1.0"))
    analytic = sampler_failure_analytic(kind, a, n, k, rh_th, max_slots, p)
    mc = sampler_failure_mc(kind, a, n, k, rh_th, trials, seed, max_slots, p)
    return [
        name, kind, rh_th, n, a, k,
        fmt6(analytic), sci_if_tiny(analytic),
        fmt6(mc.rate), fmt6(mc.ci_low), fmt6(mc.ci_high), trials,
    ]


def cmd_failprob(cfg: ExperimentConfig, out: str, jobs: int) -> None:
    if not cfg.samplers:
        raise ConfigError("failprob needs at least one [sampler.*] section")
    max_slots = max_acts_per_trefi(cfg.timing)
    rh_list = cfg.sweep.get("rh_th", [cfg.rh_th])
    n_list = cfg.sweep.get("n", [max_slots])
    a_list = cfg.sweep.get("a", [1])
    points = []
    idx = 0
    for name, body in sorted(cfg.samplers.items()):
        for rh_th in rh_list:
            for n in n_list:
                for a in a_list:
                    if not 1 <= a <= n <= max_slots:
                        print(f"warning: skipping {name} n={n} a={a}: outside 1 <= a <= n <= {max_slots}",
                              file=sys.stderr)
                        continue
                    points.append((name, body, rh_th, n, a, _point_seed(cfg.seed, idx),
                                   cfg.trials, max_slots))
                    idx += 1
    rows = _map_points(_failprob_point, points, jobs)
    _write_csv(out, FAILPROB_HEADER, rows)


# -- attack ------------------------------------------------------------------


def cmd_attack(cfg: ExperimentConfig, out: str, jobs: int) -> None:
    if len(cfg.attacks) != 1:
        raise ConfigError("attack needs exactly one [attack.*] section")
    ((_, attack),) = cfg.attacks.items()
    stream = attack.build(seed=attack.seed if attack.seed is not None else cfg.seed)
    stream.validate()
    with open(out, "w", newline="") as fh:
        fh.write(stream.to_text())


# -- plumbing ----------------------------------------------------------------


def _map_points(fn, points, jobs: int) -> list:
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, points))  # map preserves sweep order
    return [fn(p) for p in points]


COMMANDS = {
    "simulate": cmd_simulate,
    "area": cmd_area,
    "failprob": cmd_failprob,
    "attack": cmd_attack,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="hammerlab",
        description="Streaming-algorithm RowHammer tracker laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("simulate", "run tracker x attack sweeps, emit security metrics CSV"),
        ("area", "per-bank area/capacity sweep CSV"),
        ("failprob", "sampler failure probabilities, analytic + Monte Carlo CSV"),
        ("attack", "emit one attack's activation stream as text"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="INI-style experiment config")
        p.add_argument("--out", required=True, help="output path")
        p.add_argument("--seed", type=int, default=None,
                       help=f"master seed (falls back to ${SEED_ENV}, then the config)")
        p.add_argument("--trials", type=int, default=None, help="Monte Carlo trials override")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweep points")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, args.seed, args.trials)
        COMMANDS[args.command](cfg, args.out, args.jobs)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

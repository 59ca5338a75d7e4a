"""Tracker implementations behind one behavioral contract."""

from __future__ import annotations

import numpy as np

from .base import BoundSpec, NullTracker, ThrottleMisuseError, Tracker, throttle_account
from .counter_table import CounterTable, Dsac, SpaceSaving
from .countmin import CountMinSketch, mix64
from .exact import ExactCounter
from .lossy import LossyCounting
from .samplers import MintSampler, Para, PrideSampler, ReservoirSampler, mint_select
from .sticky import StickySampling

__all__ = [
    "BoundSpec",
    "CounterTable",
    "CountMinSketch",
    "Dsac",
    "ExactCounter",
    "LossyCounting",
    "MintSampler",
    "NullTracker",
    "Para",
    "PrideSampler",
    "ReservoirSampler",
    "SpaceSaving",
    "StickySampling",
    "ThrottleMisuseError",
    "Tracker",
    "mint_select",
    "mix64",
    "throttle_account",
    "tracker_from_config",
]

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _as_bool(raw: str, key: str) -> bool:
    v = raw.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ValueError(f"{key}: expected a boolean, got {raw!r}")


def tracker_from_config(
    cfg: dict,
    rng: np.random.Generator | None = None,
    max_slots: int = 73,
) -> Tracker:
    """Build a tracker from a plain key-value configuration section.

    ``kind`` selects the tracker; the remaining keys are its parameters
    (capacity/width/depth, epsilon, delta, p, k, policy, thresholds,
    seed).  A ``seed`` key overrides the supplied rng.
    """
    cfg = {k.strip(): str(v).strip() for k, v in cfg.items()}
    kind = cfg.get("kind")
    if kind is None:
        raise ValueError("tracker section needs a 'kind' key")
    if "seed" in cfg:
        rng = np.random.default_rng(int(cfg["seed"]))
    opt_int = lambda key: int(cfg[key]) if key in cfg else None

    if kind == "null":
        return NullTracker()
    if kind == "space_saving":
        return SpaceSaving(
            capacity=int(cfg["capacity"]),
            policy=cfg.get("policy", "decrement_to_min"),
            graphene_threshold=opt_int("graphene_threshold"),
            trigger_threshold=opt_int("trigger_threshold"),
        )
    if kind == "dsac":
        return Dsac(
            capacity=int(cfg["capacity"]),
            technique_i=_as_bool(cfg.get("technique_i", "true"), "technique_i"),
            technique_ii=_as_bool(cfg.get("technique_ii", "true"), "technique_ii"),
            policy=cfg.get("policy", "none"),
            rng=rng,
            reset_to_one=_as_bool(cfg.get("reset_to_one", "false"), "reset_to_one"),
        )
    if kind == "countmin":
        if "hash_seed" in cfg:
            hash_seed = int(cfg["hash_seed"])
        elif rng is not None:
            hash_seed = int(rng.integers(2**63))  # derive from the run's seed
        else:
            hash_seed = 0
        return CountMinSketch(
            width=int(cfg["width"]),
            depth=int(cfg["depth"]),
            seed=hash_seed,
            trigger_threshold=opt_int("trigger_threshold"),
        )
    if kind == "lossy_counting":
        return LossyCounting(
            epsilon=float(cfg["epsilon"]),
            trigger_threshold=opt_int("trigger_threshold"),
        )
    if kind == "sticky_sampling":
        return StickySampling(
            epsilon=float(cfg["epsilon"]),
            delta=float(cfg["delta"]),
            rng=rng,
            trigger_threshold=opt_int("trigger_threshold"),
        )
    if kind == "reservoir":
        return ReservoirSampler(
            k=int(cfg.get("k", "1")),
            rng=rng,
            per_trefi=_as_bool(cfg.get("per_trefi", "true"), "per_trefi"),
        )
    if kind == "mint":
        return MintSampler(
            k=int(cfg.get("k", "1")),
            max_slots=int(cfg.get("max_slots", str(max_slots))),
            rng=rng,
        )
    if kind == "pride":
        return PrideSampler(p=float(cfg["p"]), capacity=int(cfg["capacity"]), rng=rng)
    if kind == "para":
        return Para(p=float(cfg["p"]), rng=rng)
    if kind == "exact":
        return ExactCounter(threshold=int(cfg["threshold"]))
    raise ValueError(f"unknown tracker kind {kind!r}")

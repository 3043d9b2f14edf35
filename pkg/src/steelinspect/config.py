"""Run configuration and manifests shared by every CLI subcommand.

Config files are plain ``key = value`` text ('#' starts a comment); every
key has a validated default, unknown keys are rejected, and out-of-range
values name the field and its bound.  Machine outputs (reports, manifests)
are JSON.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field

__all__ = ["ConfigError", "InspectConfig", "load_config", "write_manifest", "config_hash"]


class ConfigError(Exception):
    """Bad config file: unknown key or out-of-range value."""


def _bound(name, value, lo=None, hi=None, lo_open=False, hi_open=False):
    if lo is not None and (value <= lo if lo_open else value < lo):
        op = ">" if lo_open else ">="
        raise ConfigError(f"{name} = {value!r} out of range (must be {op} {lo})")
    if hi is not None and (value >= hi if hi_open else value > hi):
        op = "<" if hi_open else "<="
        raise ConfigError(f"{name} = {value!r} out of range (must be {op} {hi})")


@dataclass(frozen=True)
class InspectConfig:
    """All tunables of the inspection stack, with their declared domains."""

    # line filter
    mu: float = 1.0                    # (0, 1]
    sigma1: float = 1.0                # >= 0.5 px
    scale_factor: float = math.sqrt(2) # > 1
    num_scales: int = 4                # >= 1
    gate_quantile: float = 0.80        # [0, 1)
    # stitching
    tau: float = 1.05                  # > 1
    search_radius: int = 8             # >= 1 px
    mm_per_px: float = 0.0             # 0 = derive from 180 mm footprint width
    # segmentation cleanup
    min_area: int = 8                  # >= 0 px
    # ICP
    icp_subsample: float = 1.0         # (0, 1]
    icp_max_dist: float = 0.10         # > 0 m
    icp_max_iterations: int = 50       # >= 0
    icp_error_delta: float = 1e-6      # > 0 m
    icp_error_floor: float = 1e-3      # > 0 m
    icp_max_rotation: float = 0.5      # > 0 rad
    icp_max_translation: float = 0.5   # > 0 m
    # simulator
    robot_weight: float = 6.0          # > 0 kgf
    robot_force: float = 16.0          # > 0 kgf
    robot_friction: float = 0.5        # (0, 2]
    robot_com_ratio: float = 0.25      # > 0, d/L
    ir_epsilon: float = 0.01           # > 0

    def __post_init__(self):
        _bound("mu", self.mu, lo=0, lo_open=True, hi=1.0)
        _bound("sigma1", self.sigma1, lo=0.5)
        _bound("scale_factor", self.scale_factor, lo=1.0, lo_open=True)
        _bound("num_scales", self.num_scales, lo=1)
        _bound("gate_quantile", self.gate_quantile, lo=0.0, hi=1.0, hi_open=True)
        _bound("tau", self.tau, lo=1.0, lo_open=True)
        _bound("search_radius", self.search_radius, lo=1)
        _bound("mm_per_px", self.mm_per_px, lo=0.0)
        _bound("min_area", self.min_area, lo=0)
        _bound("icp_subsample", self.icp_subsample, lo=0, lo_open=True, hi=1.0)
        _bound("icp_max_dist", self.icp_max_dist, lo=0, lo_open=True)
        _bound("icp_max_iterations", self.icp_max_iterations, lo=0)
        _bound("icp_error_delta", self.icp_error_delta, lo=0, lo_open=True)
        _bound("icp_error_floor", self.icp_error_floor, lo=0, lo_open=True)
        _bound("icp_max_rotation", self.icp_max_rotation, lo=0, lo_open=True)
        _bound("icp_max_translation", self.icp_max_translation, lo=0, lo_open=True)
        _bound("robot_weight", self.robot_weight, lo=0, lo_open=True)
        _bound("robot_force", self.robot_force, lo=0, lo_open=True)
        _bound("robot_friction", self.robot_friction, lo=0, lo_open=True, hi=2.0)
        _bound("robot_com_ratio", self.robot_com_ratio, lo=0, lo_open=True)
        _bound("ir_epsilon", self.ir_epsilon, lo=0, lo_open=True)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(InspectConfig)}
_ENV_PREFIX = "STEELINSPECT_"


def load_config(path=None, env=None) -> InspectConfig:
    """Parse a key-value config file; env vars STEELINSPECT_<KEY> override.

    A missing or empty file yields all defaults.
    """
    values = {}
    if path is not None:
        with open(path) as f:
            for lineno, raw in enumerate(f, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
                key, _, val = line.partition("=")
                values[key.strip()] = val.strip()
    env = os.environ if env is None else env
    for key in _FIELD_TYPES:
        ev = env.get(_ENV_PREFIX + key.upper())
        if ev is not None:
            values[key] = ev

    kwargs = {}
    for key, val in values.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        caster = int if _FIELD_TYPES[key] in ("int", int) else float
        try:
            kwargs[key] = caster(val)
        except ValueError as e:
            raise ConfigError(f"{key} = {val!r}: not a number") from e
    return InspectConfig(**kwargs)


def config_hash(cfg: InspectConfig) -> str:
    payload = json.dumps(dataclasses.asdict(cfg), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, cfg: InspectConfig, inputs=(), counters=None, tool_version="0.1.0"):
    """Write a JSON run manifest next to the outputs; returns the record."""
    record = {
        "tool_version": tool_version,
        "config_hash": config_hash(cfg),
        "config": dataclasses.asdict(cfg),
        "inputs": {os.path.basename(p): _digest(p) for p in inputs},
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "counters": dict(counters or {}),
    }
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as f:
        json.dump(record, f, indent=2, sort_keys=True)
        f.write("\n")
    return record

"""Declarative experiment configuration.

One YAML file selects an experiment, a seed, calibration overrides,
and per-experiment parameters.  The schema is strict: any key not in
the default tree is a hard error, so a typo in a physics parameter
cannot silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

from .device import DeviceParams, QubitParams, default_device
from .errors import ConfigError
from .experiments import EXPERIMENTS

_QUBIT_KEYS = ("T1_int_us", "T2R_us", "F_g", "F_e", "g_mhz", "kappa_inv_ns")
_DEVICE_SCALARS = ("eta", "tau_ns", "t1_saw_us")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    device: DeviceParams
    params: dict[str, Any]


def _qubit_dict(q: QubitParams) -> dict:
    return {k: getattr(q, k) for k in _QUBIT_KEYS}


def device_defaults() -> dict:
    d = default_device()
    out: dict[str, Any] = {k: getattr(d, k) for k in _DEVICE_SCALARS}
    out["q1"] = _qubit_dict(d.q1)
    out["q2"] = _qubit_dict(d.q2)
    return out


def default_config(experiment: str) -> dict:
    """Fully populated config dict for one experiment."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment '{experiment}'; choose from "
            + ", ".join(sorted(EXPERIMENTS))
        )
    return {
        "experiment": experiment,
        "seed": 1234,
        "device": device_defaults(),
        "params": dict(EXPERIMENTS[experiment].defaults),
    }


def _check_number(value, default, where: str):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    return type(default)(value) if isinstance(default, (int, float)) else value


def _merge_section(raw: dict, defaults: dict, where: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be a mapping")
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key(s) under {where}: {', '.join(unknown)}")
    merged = dict(defaults)
    for key, value in raw.items():
        default = defaults[key]
        spot = f"{where}.{key}"
        if isinstance(default, dict):
            merged[key] = _merge_section(value, default, spot)
        elif default is None:
            merged[key] = None if value is None else _check_number(value, 1.0, spot)
        elif isinstance(default, bool):
            if not isinstance(value, bool):
                raise ConfigError(f"{spot} must be a boolean")
            merged[key] = value
        elif isinstance(default, (int, float)):
            merged[key] = _check_number(value, default, spot)
        else:
            if not isinstance(value, type(default)):
                raise ConfigError(f"{spot} has the wrong type")
            merged[key] = value
    return merged


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Merge a raw mapping over the defaults and build the config."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    if "experiment" not in raw:
        raise ConfigError("config needs an 'experiment' key")
    experiment = raw["experiment"]
    base = default_config(experiment)
    unknown = sorted(set(raw) - set(base))
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    seed = raw.get("seed", base["seed"])
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    dev_raw = _merge_section(raw.get("device", {}), base["device"], "device")
    params = _merge_section(raw.get("params", {}), base["params"], "params")
    device = DeviceParams(
        q1=QubitParams(**dev_raw["q1"]),
        q2=QubitParams(**dev_raw["q2"]),
        **{k: dev_raw[k] for k in _DEVICE_SCALARS},
    )
    return ExperimentConfig(experiment=experiment, seed=seed,
                            device=device, params=params)


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"config does not parse: {exc}") from exc
    if raw is None:
        raise ConfigError("config file is empty")
    return config_from_dict(raw)


def effective_dict(cfg: ExperimentConfig) -> dict:
    """Canonical default-merged form, suitable for hashing and re-running."""
    return {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "device": {
            **{k: getattr(cfg.device, k) for k in _DEVICE_SCALARS},
            "q1": _qubit_dict(cfg.device.q1),
            "q2": _qubit_dict(cfg.device.q2),
        },
        "params": dict(cfg.params),
    }


def with_seed(cfg: ExperimentConfig, seed: int) -> ExperimentConfig:
    return dataclasses.replace(cfg, seed=int(seed))


def set_by_path(cfg: ExperimentConfig, path: str, value) -> ExperimentConfig:
    """New config with one scalar field addressed by a dotted path changed."""
    parts = path.split(".")
    raw = effective_dict(cfg)
    node = raw
    for part in parts[:-1]:
        if not isinstance(node, dict) or part not in node:
            raise ConfigError(f"no such config section: {path}")
        node = node[part]
    leaf = parts[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"no such config field: {path}")
    if isinstance(node[leaf], dict):
        raise ConfigError(f"{path} is a section, not a scalar")
    if path == "experiment":
        raise ConfigError("the experiment id cannot be swept")
    node[leaf] = value
    return config_from_dict(raw)

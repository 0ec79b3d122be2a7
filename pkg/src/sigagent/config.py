"""Run configuration: YAML file, ``${VAR}`` interpolation, env and flag overrides.

Precedence, highest first: command-line ``--set``/flags, environment variables
named ``SIGAGENT_<SECTION>__<KEY>`` (or ``SIGAGENT_<KEY>`` for top-level keys),
then the file, then built-in defaults.
"""

from __future__ import annotations

import copy
import os
import re
from pathlib import Path

import yaml

from .errors import ConfigError

DEFAULTS: dict = {
    "seed": 0,
    "provider": {
        "kind": "scripted",  # scripted | remote | surrogate | ngram-local
        "fixture": None,
        "endpoint": None,
        "model": None,
        "api_key_env": "SIGAGENT_API_KEY",
        "timeout": 60.0,
    },
    "paths": {
        "knowledge": None,  # None: bundled knowledge base
        "corpus": None,  # None: bundled corpus
        "models": "models",
        "datasets": "datasets",
        "output": "out",
    },
    "planner": {"max_hops": 3, "top_k": 3, "simple_threshold": 0.6, "moderate_threshold": 0.3},
    "codec": {"model": None, "context_lengths": [1, 2], "order": 2, "smoothing": 0.1, "block_lines": 15},
    "optimizer": {"objective": "sphere", "proposer": "surrogate", "budget": 100, "n_init": 8, "F": 0.8, "CR": 0.9, "alpha": 10.0,
                  "runs": 20, "methods": ["hybrid", "de", "sa"]},
    "detector": {"scene": None, "scr_db": 10.0, "n_frames": 200, "frame_length": 1024, "shape": 1.0,
                 "train_fraction": 0.7, "theta": [-450.0, 0.1, 16], "objective_scr_db": -5.0},
}

# inputs that must exist when set; outputs are created on demand
INPUT_PATHS = (("paths", "knowledge"), ("paths", "corpus"), ("provider", "fixture"), ("codec", "model"),
               ("detector", "scene"))
OUTPUT_PATHS = (("paths", "models"), ("paths", "datasets"), ("paths", "output"))
PROVIDERS = ("scripted", "remote", "surrogate", "ngram-local")

_VAR = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)(?::-([^}]*))?\}")


def interpolate(value, env):
    if isinstance(value, str):
        def sub(m):
            name, default = m.group(1), m.group(2)
            if name in env:
                return env[name]
            if default is not None:
                return default
            raise ConfigError(f"environment variable {name} is not set")
        out = _VAR.sub(sub, value)
        # a value that is exactly one reference keeps its YAML type ("50" -> 50)
        return yaml.safe_load(out) if _VAR.fullmatch(value) and out.strip() else out
    if isinstance(value, dict):
        return {k: interpolate(v, env) for k, v in value.items()}
    if isinstance(value, list):
        return [interpolate(v, env) for v in value]
    return value


def _merge(base: dict, extra: dict, where: str = "") -> dict:
    for k, v in extra.items():
        if k not in base:
            raise ConfigError(f"unknown configuration key {where}{k}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{where}{k} must be a mapping")
            _merge(base[k], v, f"{where}{k}.")
        else:
            base[k] = v
    return base


def _set_path(data: dict, dotted: str, raw: str):
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ConfigError(f"unknown configuration key {dotted}")
        node = node[k]
    if keys[-1] not in node or isinstance(node[keys[-1]], dict):
        raise ConfigError(f"unknown configuration key {dotted}")
    node[keys[-1]] = yaml.safe_load(raw) if isinstance(raw, str) else raw


def _env_overrides(env) -> dict[str, str]:
    out = {}
    for name, value in env.items():
        if not name.startswith("SIGAGENT_"):
            continue
        parts = name[len("SIGAGENT_"):].lower().split("__")
        node = DEFAULTS
        ok = True
        for p in parts:
            if not isinstance(node, dict) or p not in node:
                ok = False
                break
            node = node[p]
        if ok and not isinstance(node, dict):
            out[".".join(parts)] = value
    return out


class RunConfig:
    def __init__(self, data: dict, base_dir: Path):
        self.data = data
        self.base_dir = base_dir

    def __getitem__(self, section):
        return self.data[section]

    @property
    def seed(self) -> int:
        return int(self.data["seed"])

    def path(self, section: str, key: str) -> Path | None:
        v = self.data[section][key]
        if v is None:
            return None
        p = Path(v)
        return p if p.is_absolute() else (self.base_dir / p).resolve()

    def echo(self) -> dict:
        return copy.deepcopy(self.data)


def load_config(path=None, overrides: dict | None = None, env=None) -> RunConfig:
    env = os.environ if env is None else env
    data = copy.deepcopy(DEFAULTS)
    base_dir = Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text()) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"bad YAML in {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        _merge(data, interpolate(raw, env))
        base_dir = path.resolve().parent
    for dotted, value in _env_overrides(env).items():
        _set_path(data, dotted, value)
    for dotted, value in (overrides or {}).items():
        _set_path(data, dotted, value)
    cfg = RunConfig(data, base_dir)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    d = cfg.data
    if not isinstance(d["seed"], int):
        raise ConfigError("seed must be an explicit integer")
    if d["provider"]["kind"] not in PROVIDERS:
        raise ConfigError(f"provider.kind must be one of {PROVIDERS}")
    for section, key in INPUT_PATHS:
        p = cfg.path(section, key)
        if p is not None and not p.exists():
            raise ConfigError(f"{section}.{key}: {p} does not exist")
    opt = d["optimizer"]
    if int(opt["n_init"]) < 4:
        raise ConfigError("optimizer.n_init must be at least 4")
    if int(opt["budget"]) <= int(opt["n_init"]):
        raise ConfigError(f"optimizer.budget ({opt['budget']}) must exceed optimizer.n_init ({opt['n_init']})")
    if opt["proposer"] not in ("surrogate", "provider"):
        raise ConfigError("optimizer.proposer must be 'surrogate' or 'provider'")
    if int(opt["runs"]) < 1:
        raise ConfigError("optimizer.runs must be positive")
    ks = d["codec"]["context_lengths"]
    if not ks or any(int(k) < 1 for k in ks):
        raise ConfigError("codec.context_lengths must be positive integers")
    det = d["detector"]
    if int(det["n_frames"]) < 4 or int(det["n_frames"]) % 2:
        raise ConfigError("detector.n_frames must be even and at least 4")
    if len(det["theta"]) != 3:
        raise ConfigError("detector.theta needs three values")


def parse_assignments(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v
    return out

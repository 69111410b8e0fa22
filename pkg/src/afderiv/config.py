"""Experiment configuration, read from TOML and validated up front."""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .derivations.periodic import TARGETS
from .homotopy.instances import FAMILIES

INTERVAL_MIN_CHI = 3
CIRCLE_MIN_CHI = 4


class ConfigError(ValueError):
    pass


@dataclass
class HomotopyConfig:
    dims: list[int] = field(default_factory=lambda: [2, 4, 8, 16, 32])
    epsilons: list[float] = field(default_factory=lambda: [0.5, 1.0])
    #: instances per (dimension, epsilon) pair
    instances: int = 200
    families: list[str] = field(default_factory=lambda: list(FAMILIES))
    #: instances are tuned to ``||[h,u]|| = target_fraction * nu``
    target_fraction: float = 0.999
    #: multiplies the threshold used to build instances; above 1 is a negative control
    nu_factor: float = 1.0
    samples: int = 200
    trace: bool = False


@dataclass
class IntervalConfig:
    grid: int = 129
    base: list[int] = field(default_factory=lambda: [1])
    chi: list[list[list[int]]] = field(default_factory=lambda: [[[8]], [[8]]])
    windows: list[float] | None = None
    #: samples per (m, n) pair; keys are "m,n"
    samples: dict[str, int] = field(default_factory=lambda: {"1,1": 420, "2,1": 30, "2,2": 50})
    min_applicable: int = 100
    gap_overrides: dict[str, float] = field(default_factory=dict)


@dataclass
class CircleConfig:
    grid: int = 128
    base: list[int] = field(default_factory=lambda: [1])
    chi: list[list[list[int]]] = field(default_factory=lambda: [[[4]], [[4]]])
    #: ``a_n`` for levels 2, 3, ...; omitted means the periodic ladder (all ones)
    scales: list[float] | None = None
    candidates: int = 50
    target: str = "canonical"
    times: int = 33
    periodicity_samples: int = 20


@dataclass
class ExperimentConfig:
    seed: int = 0
    out: str = "results"
    homotopy: HomotopyConfig = field(default_factory=HomotopyConfig)
    interval: IntervalConfig = field(default_factory=IntervalConfig)
    circle: CircleConfig = field(default_factory=CircleConfig)

    def to_dict(self) -> dict:
        return asdict(self)


def _section(cls, data: dict, name: str):
    if not isinstance(data, dict):
        raise ConfigError(f"[{name}] must be a table")
    known = set(cls.__dataclass_fields__)
    extra = set(data) - known
    if extra:
        raise ConfigError(f"[{name}] unknown keys: {', '.join(sorted(extra))}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"[{name}] {exc}") from exc


def _check_chi(chain: Any, minimum: int, name: str):
    if not isinstance(chain, list) or not chain:
        raise ConfigError(f"{name}.chi: empty level list")
    for k, mat in enumerate(chain):
        if not isinstance(mat, list) or not mat or not all(isinstance(r, list) and r for r in mat):
            raise ConfigError(f"{name}.chi[{k}] must be a non-empty matrix")
        width = len(mat[0])
        for row in mat:
            if len(row) != width:
                raise ConfigError(f"{name}.chi[{k}] is ragged")
            for v in row:
                if not isinstance(v, int) or v < minimum:
                    raise ConfigError(f"{name}.chi[{k}] entries must be integers >= {minimum}")
    for k in range(1, len(chain)):
        if len(chain[k][0]) != len(chain[k - 1]):
            raise ConfigError(f"{name}.chi[{k}] has {len(chain[k][0])} columns, "
                              f"expected {len(chain[k - 1])} (rows of the previous level)")


def _check_windows(w, levels: int):
    if w is None:
        return
    if len(w) < levels:
        raise ConfigError(f"interval.windows needs {levels} entries")
    if not 0 < w[0] <= 0.6:
        raise ConfigError("interval.windows: eps_1 must lie in (0, 3/5]")
    if any(b >= a for a, b in zip(w, w[1:])) or w[-1] <= 0:
        raise ConfigError("interval.windows must be positive and strictly decreasing")


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    h = cfg.homotopy
    if not h.dims or any((not isinstance(d, int)) or d < 1 for d in h.dims):
        raise ConfigError("homotopy.dims must be positive integers")
    if not h.epsilons or any(e <= 0 for e in h.epsilons):
        raise ConfigError("homotopy.epsilons must be positive")
    if h.instances < 0:
        raise ConfigError("homotopy.instances must be >= 0")
    if not h.families or any(f not in FAMILIES for f in h.families):
        raise ConfigError(f"homotopy.families must be drawn from {FAMILIES}")
    if not 0 < h.target_fraction < 1:
        raise ConfigError("homotopy.target_fraction must lie in (0, 1)")
    if h.nu_factor <= 0:
        raise ConfigError("homotopy.nu_factor must be positive")
    if h.samples < 2:
        raise ConfigError("homotopy.samples must be >= 2")

    iv = cfg.interval
    _check_chi(iv.chi, INTERVAL_MIN_CHI, "interval")
    if len(iv.chi[0][0]) != len(iv.base) or any(d < 1 for d in iv.base):
        raise ConfigError("interval.base must list one positive block size per column of chi[0]")
    if iv.grid < 2:
        raise ConfigError("interval.grid must be >= 2")
    _check_windows(iv.windows, len(iv.chi) + 1)
    for key, count in iv.samples.items():
        try:
            m, n = (int(v) for v in key.split(","))
        except ValueError as exc:
            raise ConfigError(f"interval.samples key {key!r} is not 'm,n'") from exc
        if not 1 <= n <= m <= len(iv.chi) or count < 0:
            raise ConfigError(f"interval.samples: invalid entry {key!r} = {count}")
    for key, a in iv.gap_overrides.items():
        if not key.isdigit() or not 2 <= int(key) <= len(iv.chi) + 1 or a <= 0:
            raise ConfigError(f"interval.gap_overrides: invalid entry {key!r} = {a}")

    cc = cfg.circle
    _check_chi(cc.chi, CIRCLE_MIN_CHI, "circle")
    if len(cc.chi[0][0]) != len(cc.base) or any(d < 1 for d in cc.base):
        raise ConfigError("circle.base must list one positive block size per column of chi[0]")
    if cc.grid < 3:
        raise ConfigError("circle.grid must be >= 3")
    if cc.scales is not None:
        if len(cc.scales) < len(cc.chi):
            raise ConfigError(f"circle.scales needs {len(cc.chi)} entries")
        if min(cc.scales) <= 0:
            raise ConfigError("circle.scales must be positive")
    if cc.target not in TARGETS:
        raise ConfigError(f"circle.target must be one of {TARGETS}")
    if cc.candidates < 0 or cc.times < 2:
        raise ConfigError("circle.candidates must be >= 0 and circle.times >= 2")
    return cfg


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a table")
    top = {k: v for k, v in data.items() if k not in ("homotopy", "interval", "circle")}
    cfg = _section(ExperimentConfig, top, "top level")
    cfg.homotopy = _section(HomotopyConfig, data.get("homotopy", {}), "homotopy")
    cfg.interval = _section(IntervalConfig, data.get("interval", {}), "interval")
    cfg.circle = _section(CircleConfig, data.get("circle", {}), "circle")
    if not isinstance(cfg.seed, int):
        raise ConfigError("seed must be an integer")
    return validate(cfg)


def load(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return validate(ExperimentConfig())
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return from_dict(data)

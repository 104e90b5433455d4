"""Experiment configuration read from INI files."""
from __future__ import annotations

import configparser
import hashlib
import json
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ..errors import ConfigError
from ..evaluation import METRICS, MODEL_NAMES
from ..rbf import InterpSettings
from ..snapshots import FAMILY_NAMES

_NUM = r"[-+]?(?:[0-9.]+(?:[eE][-+]?[0-9]+)?|inf)"
THRESHOLD_RE = re.compile(rf"^\s*(<=|>=|<|>)\s*({_NUM})\s*$")
RANGE_RE = re.compile(rf"^\s*in\s*\[\s*({_NUM})\s*,\s*({_NUM})\s*\]\s*$")


@dataclass(frozen=True)
class SweepSpec:
    sizes: tuple = (100, 500, 1000, 3000)
    realizations: int = 5
    rank: int = 10
    models: tuple = ("tpca_interp", "gbar_interp")
    metrics: tuple = ("w2",)


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    family: str
    n_train: int = 1000
    train_seed: int = 1
    n_test: int = 500
    test_seed: int = 2
    n_quad: int = 1024
    n_cells: int | None = None
    domain: tuple | None = None
    ranks: tuple = (1, 2, 3, 5, 10, 15, 20)
    metrics: tuple = METRICS
    models: tuple = MODEL_NAMES
    n_max: int = 20
    gbar_eps: float = 0.0
    center_pca: bool = False
    policy: str = "rearrange"
    fem_h: float = 1e-3
    workers: int = 1
    output: str = ""
    dump_index: int = 0
    dump_ranks: tuple = (5, 10)
    decay_max: int = 50
    timing_repeats: int = 3
    interp: InterpSettings = InterpSettings()
    sweep: SweepSpec = SweepSpec()
    thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILY_NAMES:
            raise ConfigError(f"unknown family {self.family!r}; choose from {FAMILY_NAMES}")
        for k in ("n_train", "n_test", "n_quad", "n_max", "workers", "decay_max",
                  "timing_repeats"):
            if getattr(self, k) < 1:
                raise ConfigError(f"{k} must be positive, got {getattr(self, k)}")
        if self.n_train < 2:
            raise ConfigError("n_train must be at least 2")
        if self.n_cells is not None and self.n_cells < 2:
            raise ConfigError("n_cells must be at least 2")
        if list(self.ranks) != sorted(self.ranks) or any(n < 0 for n in self.ranks):
            raise ConfigError(f"ranks must be nonnegative and ascending, got {self.ranks}")
        for m in self.metrics:
            if m not in METRICS:
                raise ConfigError(f"unknown metric {m!r}; choose from {METRICS}")
        for m in tuple(self.models) + tuple(self.sweep.models):
            if m not in MODEL_NAMES:
                raise ConfigError(f"unknown model {m!r}; choose from {MODEL_NAMES}")
        if self.policy not in ("rearrange", "reject"):
            raise ConfigError(f"unknown repair policy {self.policy!r}")
        if self.fem_h <= 0:
            raise ConfigError("fem_h must be positive")
        if any(s < 2 for s in self.sweep.sizes) or self.sweep.realizations < 1:
            raise ConfigError("sweep sizes must be >= 2 and realizations >= 1")
        for key, (op, _) in self.thresholds.items():
            if op not in ("<", "<=", ">", ">=", "in"):
                raise ConfigError(f"threshold {key}: bad operator {op!r}")

    def to_dict(self):
        d = asdict(self)
        d["thresholds"] = {k: list(v) for k, v in sorted(self.thresholds.items())}
        return d

    @property
    def hash(self) -> str:
        """Digest of every setting that affects results (not the output path)."""
        d = self.to_dict()
        d.pop("output")
        d.pop("workers")
        blob = json.dumps(d, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_overrides(self, **kw):
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


# --------------------------------------------------------------------------
# parsing

_INT = int
_FLOAT = float


def _bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _list(conv):
    def parse(s):
        return tuple(conv(p.strip()) for p in s.split(",") if p.strip())
    return parse


def _opt_int(s):
    return None if s.strip().lower() in ("", "none", "default") else int(s)


def _domain(s):
    if s.strip().lower() in ("", "none", "default"):
        return None
    lo, hi = _list(float)(s)
    return (lo, hi)


_EXPERIMENT_KEYS = {
    "name": str, "family": str, "n_train": _INT, "train_seed": _INT, "n_test": _INT,
    "test_seed": _INT, "n_quad": _INT, "n_cells": _opt_int, "domain": _domain,
    "ranks": _list(int), "metrics": _list(str), "models": _list(str), "n_max": _INT,
    "gbar_eps": _FLOAT, "center_pca": _bool, "policy": str, "fem_h": _FLOAT,
    "workers": _INT, "output": str, "dump_index": _INT, "dump_ranks": _list(int),
    "decay_max": _INT, "timing_repeats": _INT,
}
_INTERP_KEYS = {"policy": str, "r": _INT, "tau": _FLOAT, "ridge": _FLOAT,
                "shape": lambda s: None if s.strip().lower() in ("", "none", "median") else float(s),
                "polynomial": _bool}
_SWEEP_KEYS = {"sizes": _list(int), "realizations": _INT, "rank": _INT,
               "models": _list(str), "metrics": _list(str)}


def _line_of(text, section, key):
    """1-based line number of ``key`` inside ``[section]`` (0 if not found)."""
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return i
    return 0


def _read_section(cp, text, source, section, schema):
    out = {}
    if not cp.has_section(section):
        return out
    for key, raw in cp.items(section):
        line = _line_of(text, section, key)
        if key not in schema:
            raise ConfigError(f"{source}:{line}: unknown key {key!r} in [{section}]")
        try:
            out[key] = schema[key](raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}:{line}: bad value for {section}.{key}: {exc}") from None
    return out


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    unknown = set(cp.sections()) - {"experiment", "interp", "sweep", "thresholds"}
    if unknown:
        s = sorted(unknown)[0]
        raise ConfigError(f"{source}:{_line_of_section(text, s)}: unknown section [{s}]")
    if not cp.has_section("experiment"):
        raise ConfigError(f"{source}: missing [experiment] section")
    exp = _read_section(cp, text, source, "experiment", _EXPERIMENT_KEYS)
    for req in ("name", "family"):
        if req not in exp:
            raise ConfigError(f"{source}: [experiment] needs a {req!r} key")
    try:
        interp = InterpSettings(**_read_section(cp, text, source, "interp", _INTERP_KEYS))
        sweep = SweepSpec(**_read_section(cp, text, source, "sweep", _SWEEP_KEYS))
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    thresholds = {}
    if cp.has_section("thresholds"):
        for key, raw in cp.items("thresholds"):
            m = THRESHOLD_RE.match(raw)
            r = RANGE_RE.match(raw)
            if m:
                thresholds[key] = (m.group(1), float(m.group(2)))
            elif r:
                thresholds[key] = ("in", (float(r.group(1)), float(r.group(2))))
            else:
                line = _line_of(text, "thresholds", key)
                raise ConfigError(f"{source}:{line}: threshold {key!r} must read "
                                  f"'<op> <number>' or 'in [a, b]', got {raw!r}")
    try:
        return ExperimentConfig(**exp, interp=interp, sweep=sweep, thresholds=thresholds)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _line_of_section(text, section):
    for i, line in enumerate(text.splitlines(), 1):
        if line.strip() == f"[{section}]":
            return i
    return 0


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def config_fields():
    return [f.name for f in fields(ExperimentConfig)]

"""Run configuration: flat dotted-key text format, validation, defaults.

The format is line-oriented ``key = value`` with ``#`` comment lines and
blank lines ignored. Keys are dotted paths (``nodes.target.velocity_mps``);
values are scalars, names, or comma-separated vectors. Unknown keys are
rejected with their line number so typos fail loudly instead of silently
running defaults.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

from .concatenation import ConcatCase
from .constants import SPEED_OF_LIGHT
from .errors import ConfigError
from .geometry import ISOTROPIC, PATTERNS

SENSING_MODES = ("bistatic", "monostatic")
CONDITION_CHOICES = ("auto", "LOS", "NLOS")
POLARIZATION_CHOICES = ("identity", "full", "partial")
COUPLING_MODES = ("added", "embedded")


@dataclass
class NodeConfig:
    """Position, motion, and array layout of one terminal."""

    position_m: tuple
    velocity_mps: tuple = (0.0, 0.0, 0.0)
    micro_velocity_mps: tuple = (0.0, 0.0, 0.0)
    elements: int = 1
    element_spacing_m: float | None = None  # None: half wavelength
    pattern: str = ISOTROPIC
    slant_deg: float = 0.0


@dataclass
class RunConfig:
    """Validated simulation configuration."""

    frequency_hz: float
    scenario: str = "UMi"
    sensing_mode: str = "bistatic"
    concat_case: ConcatCase = ConcatCase.CASE_2RN
    drops: int = 1
    master_seed: int = 1
    scenario_table: str | None = None
    absolute_delay: bool = False
    split_strongest: bool = False
    tx: NodeConfig = field(default_factory=lambda: NodeConfig(position_m=(0.0, 0.0, 10.0)))
    rx: NodeConfig = field(default_factory=lambda: NodeConfig(position_m=(60.0, 0.0, 10.0)))
    target: NodeConfig = field(
        default_factory=lambda: NodeConfig(position_m=(20.0, 15.0, 1.5))
    )
    rcs_mean_m2: float = 1.0
    rcs_b2_mean_db: float = 0.0
    rcs_b2_std_db: float = 0.0
    rcs_b1_table: str | None = None
    rcs_target_class: str = "uav"
    pol_mode: str = "identity"
    pol_alphas: tuple = (1.0, 0.0, 0.0, 1.0)
    snap_start_s: float = 0.0
    snap_step_s: float = 1e-3
    snap_count: int = 1
    coupling_o_isac: float = 1.0
    coupling_mode: str = "added"
    coupling_removal_fraction: float = 0.0
    background_enabled: bool = False
    cond_tx_target: str = "auto"
    cond_target_rx: str = "auto"
    cond_background: str = "auto"
    out_dir: str | None = None
    emit_cir: bool = True

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz


def _parse_bool(text: str, key: str, line: int) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"line {line}: {key} expects true/false, got {text!r}")


def _parse_float(text: str, key: str, line: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"line {line}: {key} expects a number, got {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"line {line}: {key} must be finite")
    return v


def _parse_int(text: str, key: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(
            f"line {line}: {key} expects an integer, got {text!r}"
        ) from None


def _parse_vec(text: str, key: str, line: int, n: int = 3) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise ConfigError(
            f"line {line}: {key} expects {n} comma-separated numbers, got {text!r}"
        )
    return tuple(_parse_float(p, key, line) for p in parts)


def _parse_choice(text: str, key: str, line: int, choices) -> str:
    t = text.strip()
    if t not in choices:
        raise ConfigError(
            f"line {line}: {key} must be one of {tuple(choices)}, got {t!r}"
        )
    return t


def parse_config_text(text: str) -> dict:
    """Parse the raw key = value lines into {key: (value_text, line_number)}."""
    entries: dict = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {ln}: empty key")
        if key in entries:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        entries[key] = (value, ln)
    return entries


def _node_keys(prefix: str):
    return {
        f"nodes.{prefix}.position_m": ("vec", "position_m"),
        f"nodes.{prefix}.velocity_mps": ("vec", "velocity_mps"),
        f"nodes.{prefix}.micro_velocity_mps": ("vec", "micro_velocity_mps"),
        f"nodes.{prefix}.elements": ("int", "elements"),
        f"nodes.{prefix}.element_spacing_m": ("float", "element_spacing_m"),
        f"nodes.{prefix}.pattern": ("pattern", "pattern"),
        f"nodes.{prefix}.slant_deg": ("float", "slant_deg"),
    }


_NODE_SECTIONS = {"tx": _node_keys("tx"), "rx": _node_keys("rx"), "target": _node_keys("target")}

_SCALAR_KEYS = {
    "scenario": "scenario",
    "frequency_hz": "frequency_hz",
    "sensing_mode": "sensing_mode",
    "concat_case": "concat_case",
    "drops": "drops",
    "master_seed": "master_seed",
    "scenario_table": "scenario_table",
    "absolute_delay": "absolute_delay",
    "split_strongest": "split_strongest",
    "rcs.mean_m2": "rcs_mean_m2",
    "rcs.b2_mean_db": "rcs_b2_mean_db",
    "rcs.b2_std_db": "rcs_b2_std_db",
    "rcs.b1_table": "rcs_b1_table",
    "rcs.target_class": "rcs_target_class",
    "polarization.mode": "pol_mode",
    "polarization.alphas": "pol_alphas",
    "snapshots.start_s": "snap_start_s",
    "snapshots.step_s": "snap_step_s",
    "snapshots.count": "snap_count",
    "coupling.o_isac": "coupling_o_isac",
    "coupling.mode": "coupling_mode",
    "coupling.removal_fraction": "coupling_removal_fraction",
    "background.enabled": "background_enabled",
    "conditions.tx_target": "cond_tx_target",
    "conditions.target_rx": "cond_target_rx",
    "conditions.background": "cond_background",
    "output.dir": "out_dir",
    "output.cir": "emit_cir",
}


def validate_config(raw: str) -> RunConfig:
    """Parse and range-check a configuration text; unknown keys are errors."""
    entries = parse_config_text(raw)
    if "frequency_hz" not in entries:
        raise ConfigError("missing required key 'frequency_hz' (carrier frequency)")

    cfg = RunConfig(frequency_hz=1.0)
    node_cfgs = {"tx": {}, "rx": {}, "target": {}}

    for key, (value, ln) in entries.items():
        handled = False
        for section, keys in _NODE_SECTIONS.items():
            if key in keys:
                kind, attr = keys[key]
                if kind == "vec":
                    node_cfgs[section][attr] = _parse_vec(value, key, ln)
                elif kind == "int":
                    node_cfgs[section][attr] = _parse_int(value, key, ln)
                elif kind == "float":
                    node_cfgs[section][attr] = _parse_float(value, key, ln)
                elif kind == "pattern":
                    node_cfgs[section][attr] = _parse_choice(value, key, ln, PATTERNS)
                handled = True
                break
        if handled:
            continue
        if key not in _SCALAR_KEYS:
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        attr = _SCALAR_KEYS[key]
        if attr in ("drops", "master_seed", "snap_count"):
            setattr(cfg, attr, _parse_int(value, key, ln))
        elif attr in (
            "frequency_hz", "rcs_mean_m2", "rcs_b2_mean_db", "rcs_b2_std_db",
            "snap_start_s", "snap_step_s", "coupling_o_isac",
            "coupling_removal_fraction",
        ):
            setattr(cfg, attr, _parse_float(value, key, ln))
        elif attr in ("absolute_delay", "split_strongest", "background_enabled", "emit_cir"):
            setattr(cfg, attr, _parse_bool(value, key, ln))
        elif attr == "sensing_mode":
            setattr(cfg, attr, _parse_choice(value, key, ln, SENSING_MODES))
        elif attr == "concat_case":
            try:
                cfg.concat_case = ConcatCase(value)
            except ValueError:
                valid = ", ".join(c.value for c in ConcatCase)
                raise ConfigError(
                    f"line {ln}: concat_case must be one of {valid}, got {value!r}"
                ) from None
        elif attr == "pol_mode":
            setattr(cfg, attr, _parse_choice(value, key, ln, POLARIZATION_CHOICES))
        elif attr == "pol_alphas":
            cfg.pol_alphas = _parse_vec(value, key, ln, n=4)
        elif attr == "coupling_mode":
            setattr(cfg, attr, _parse_choice(value, key, ln, COUPLING_MODES))
        elif attr in ("cond_tx_target", "cond_target_rx", "cond_background"):
            setattr(cfg, attr, _parse_choice(value, key, ln, CONDITION_CHOICES))
        elif attr == "rcs_target_class":
            setattr(cfg, attr, _parse_choice(
                value, key, ln, ("human", "uav", "vehicle", "agv")
            ))
        else:
            setattr(cfg, attr, value)

    for section, overrides in node_cfgs.items():
        node = getattr(cfg, section)
        for attr, v in overrides.items():
            setattr(node, attr, v)

    _range_check(cfg)
    return cfg


def _range_check(cfg: RunConfig):
    if cfg.frequency_hz <= 0:
        raise ConfigError(f"frequency_hz must be positive, got {cfg.frequency_hz}")
    if cfg.drops < 1:
        raise ConfigError(f"drops must be >= 1, got {cfg.drops}")
    if cfg.master_seed < 0:
        raise ConfigError(f"master_seed must be >= 0, got {cfg.master_seed}")
    if cfg.snap_count < 1:
        raise ConfigError(f"snapshots.count must be >= 1, got {cfg.snap_count}")
    if cfg.snap_step_s <= 0:
        raise ConfigError(f"snapshots.step_s must be positive, got {cfg.snap_step_s}")
    if cfg.rcs_mean_m2 <= 0:
        raise ConfigError(f"rcs.mean_m2 must be positive, got {cfg.rcs_mean_m2}")
    if cfg.rcs_b2_std_db < 0:
        raise ConfigError("rcs.b2_std_db must be >= 0")
    if cfg.coupling_o_isac < 0:
        raise ConfigError("coupling.o_isac must be >= 0")
    if not (0.0 <= cfg.coupling_removal_fraction < 1.0):
        raise ConfigError("coupling.removal_fraction must be in [0, 1)")
    for name in ("tx", "rx", "target"):
        node = getattr(cfg, name)
        if node.elements < 1:
            raise ConfigError(f"nodes.{name}.elements must be >= 1")
        if node.element_spacing_m is not None and node.element_spacing_m <= 0:
            raise ConfigError(f"nodes.{name}.element_spacing_m must be positive")


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return validate_config(fh.read())


def config_echo(cfg: RunConfig) -> list:
    """Canonical key = value lines reproducing the validated configuration."""
    lines = []

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, tuple):
            return ", ".join(repr(float(x)) for x in v)
        if isinstance(v, ConcatCase):
            return v.value
        return str(v)

    for key, attr in sorted(_SCALAR_KEYS.items()):
        v = getattr(cfg, attr)
        if v is None:
            continue
        lines.append(f"{key} = {fmt(v)}")
    for section in ("tx", "rx", "target"):
        node = getattr(cfg, section)
        for f in fields(node):
            v = getattr(node, f.name)
            if v is None:
                continue
            lines.append(f"nodes.{section}.{f.name} = {fmt(v)}")
    return sorted(lines)

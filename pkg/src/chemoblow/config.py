"""Scenario configuration: flat INI sections with strict key checking.

A scenario file has sections [model], [profile], [grid], [stepping],
[output], plus optional [diagnostics], [bounds], [mass_check], and
[sweep].  Unknown sections or keys are errors, so configs cannot drift
silently.  Units and intent are documented in comments inside the shipped
scenario files.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .bounds import GNConfig
from .functionals import MomentConfig
from .grid import RadialGrid, build_grid
from .model import InitialProfile, ModelParams, ParameterError, make_profile, validate_params
from .solver import StepControl


class ConfigError(ValueError):
    """Configuration file problem, naming the file, section, and key."""


_MODEL_KEYS = ("lambda", "mu", "k", "chi", "xi", "alpha", "beta", "gamma",
               "delta", "n", "r")
_PROFILE_KEYS = ("kind", "l", "cap", "scale")
_GRID_KEYS = ("cells", "stretching", "ratio")
_STEPPING_KEYS = ("t_end", "dt_init", "dt_min", "dt_max", "cfl_safety",
                  "linf_blowup_threshold", "sample_interval")
_DIAGNOSTICS_KEYS = ("sigma", "p", "s0")
_BOUNDS_KEYS = ("c_gn",)
_MASS_CHECK_KEYS = ("enabled", "t_fraction")
_OUTPUT_KEYS = ("name",)

_SECTION_KEYS = {
    "model": _MODEL_KEYS,
    "profile": _PROFILE_KEYS,
    "grid": _GRID_KEYS,
    "stepping": _STEPPING_KEYS,
    "diagnostics": _DIAGNOSTICS_KEYS,
    "bounds": _BOUNDS_KEYS,
    "mass_check": _MASS_CHECK_KEYS,
    "output": _OUTPUT_KEYS,
    "sweep": None,   # free-form dotted keys
}
_REQUIRED_SECTIONS = ("model", "profile", "grid", "stepping", "output")


@dataclass(frozen=True)
class GridSpec:
    cells: int
    stretching: str
    ratio: float

    def build(self, n: int, R: float) -> RadialGrid:
        return build_grid(n, R, self.cells, self.stretching, self.ratio)


@dataclass(frozen=True)
class MassCheckSpec:
    enabled: bool = False
    t_fraction: float = 0.8


@dataclass(frozen=True)
class Scenario:
    """A fully validated run description."""

    name: str
    params: ModelParams
    profile: InitialProfile
    grid_spec: GridSpec
    ctrl: StepControl
    sigma: float
    moment: MomentConfig
    gn: GNConfig
    mass_check: MassCheckSpec

    def build_grid(self) -> RadialGrid:
        return self.grid_spec.build(self.params.n, self.params.R)


def load_raw(path) -> dict[str, dict[str, str]]:
    """Read an INI file into nested dicts, rejecting unknown keys."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: no such config file")
    parser = configparser.ConfigParser(
        inline_comment_prefixes=("#", ";"), interpolation=None, strict=True)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    raw: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ConfigError(f"{path}: unknown section [{section}]")
        allowed = _SECTION_KEYS[section]
        entries = {}
        for key, value in parser.items(section):
            if allowed is not None and key not in allowed:
                raise ConfigError(
                    f"{path}: unknown key {key!r} in section [{section}]")
            entries[key] = value
        raw[section] = entries
    for section in _REQUIRED_SECTIONS:
        if section not in raw:
            raise ConfigError(f"{path}: missing required section [{section}]")
    return raw


def _get(raw, section, key, conv, default=None, *, where=""):
    entries = raw.get(section, {})
    if key not in entries:
        if default is not None:
            return default
        raise ConfigError(f"{where}[{section}] {key}: required key missing")
    try:
        return conv(entries[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(
            f"{where}[{section}] {key} = {entries[key]!r}: {exc}") from exc


def _to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def make_scenario(raw: dict, *, cells_override: int | None = None,
                  name_suffix: str = "", where: str = "") -> Scenario:
    """Validate raw section dicts into a Scenario."""
    try:
        params = validate_params({
            "lam": _get(raw, "model", "lambda", float, where=where),
            "mu": _get(raw, "model", "mu", float, where=where),
            "k": _get(raw, "model", "k", float, where=where),
            "chi": _get(raw, "model", "chi", float, where=where),
            "xi": _get(raw, "model", "xi", float, where=where),
            "alpha": _get(raw, "model", "alpha", float, where=where),
            "beta": _get(raw, "model", "beta", float, where=where),
            "gamma": _get(raw, "model", "gamma", float, where=where),
            "delta": _get(raw, "model", "delta", float, where=where),
            "n": _get(raw, "model", "n", int, where=where),
            "R": _get(raw, "model", "r", float, where=where),
        })
    except ParameterError as exc:
        raise ConfigError(f"{where}[model]: {exc}") from exc

    try:
        profile = make_profile(
            kind=_get(raw, "profile", "kind", str, where=where),
            L=_get(raw, "profile", "l", float, where=where),
            cap=_get(raw, "profile", "cap", float, where=where),
            scale=_get(raw, "profile", "scale", float, where=where),
            params=params)
    except ParameterError as exc:
        raise ConfigError(f"{where}[profile]: {exc}") from exc

    cells = cells_override if cells_override is not None \
        else _get(raw, "grid", "cells", int, where=where)
    stretching = _get(raw, "grid", "stretching", str, default="uniform",
                      where=where)
    ratio = _get(raw, "grid", "ratio", float, default=1.0, where=where)
    if cells < 16:
        raise ConfigError(f"{where}[grid] cells: must be >= 16 (got {cells})")
    grid_spec = GridSpec(cells=cells, stretching=stretching, ratio=ratio)
    try:
        grid_spec.build(params.n, params.R)
    except ValueError as exc:
        raise ConfigError(f"{where}[grid]: {exc}") from exc

    try:
        ctrl = StepControl(
            t_end=_get(raw, "stepping", "t_end", float, where=where),
            dt_init=_get(raw, "stepping", "dt_init", float, where=where),
            dt_min=_get(raw, "stepping", "dt_min", float, where=where),
            dt_max=_get(raw, "stepping", "dt_max", float, where=where),
            cfl_safety=_get(raw, "stepping", "cfl_safety", float,
                            default=0.4, where=where),
            linf_blowup_threshold=_get(raw, "stepping",
                                       "linf_blowup_threshold", float,
                                       default=1e8, where=where),
            sample_interval=_get(raw, "stepping", "sample_interval", float,
                                 where=where))
    except ValueError as exc:
        raise ConfigError(f"{where}[stepping]: {exc}") from exc

    sigma = _get(raw, "diagnostics", "sigma", float, default=2.0, where=where)
    # documented derived defaults: p = 1 - 1/n, s0 = (R/2)^n
    p_default = 1.0 - 1.0 / params.n
    s0_default = (params.R / 2.0) ** params.n
    try:
        moment = MomentConfig(
            p=_get(raw, "diagnostics", "p", float, default=p_default,
                   where=where),
            s0=_get(raw, "diagnostics", "s0", float, default=s0_default,
                    where=where)).validate(params)
    except ValueError as exc:
        raise ConfigError(f"{where}[diagnostics]: {exc}") from exc

    try:
        gn = GNConfig(c_gn=_get(raw, "bounds", "c_gn", float, default=10.0,
                                where=where),
                      sigma=sigma).validate(params.n)
    except ValueError as exc:
        raise ConfigError(f"{where}[bounds]: {exc}") from exc

    mass_check = MassCheckSpec(
        enabled=_get(raw, "mass_check", "enabled", _to_bool, default=False,
                     where=where),
        t_fraction=_get(raw, "mass_check", "t_fraction", float, default=0.8,
                        where=where))
    if not 0.0 < mass_check.t_fraction <= 1.0:
        raise ConfigError(f"{where}[mass_check] t_fraction: must lie in "
                          f"(0, 1] (got {mass_check.t_fraction})")

    name = _get(raw, "output", "name", str, where=where) + name_suffix
    return Scenario(name=name, params=params, profile=profile,
                    grid_spec=grid_spec, ctrl=ctrl, sigma=sigma,
                    moment=moment, gn=gn, mass_check=mass_check)


def parse_axes(raw: dict, *, where: str = "") -> list[tuple[str, list[float]]]:
    """Sweep axes: dotted section.key entries with value lists."""
    axes = []
    for dotted, text in raw.get("sweep", {}).items():
        parts = dotted.split(".")
        if len(parts) != 2 or parts[0] not in _SECTION_KEYS \
                or parts[0] == "sweep":
            raise ConfigError(
                f"{where}[sweep] {dotted}: axis keys must look like "
                f"section.key")
        section, key = parts
        allowed = _SECTION_KEYS[section]
        if allowed is not None and key not in allowed:
            raise ConfigError(
                f"{where}[sweep] {dotted}: unknown target key {key!r}")
        tokens = text.replace(",", " ").split()
        if not tokens:
            raise ConfigError(f"{where}[sweep] {dotted}: empty value list")
        try:
            values = [float(tok) for tok in tokens]
        except ValueError as exc:
            raise ConfigError(f"{where}[sweep] {dotted}: {exc}") from exc
        # rows come out lexicographic in the axes however values are listed
        axes.append((dotted, sorted(values)))
    return axes


def apply_axis_values(raw: dict, assignment: dict[str, float]) -> dict:
    """Return a copy of raw with the axis values substituted."""
    out = {sec: dict(entries) for sec, entries in raw.items()}
    out.pop("sweep", None)
    for dotted, value in assignment.items():
        section, key = dotted.split(".")
        out.setdefault(section, {})[key] = repr(value)
    return out


def parse_scenario(path, *, cells_override: int | None = None) -> Scenario:
    """Load and validate a single-run scenario file."""
    raw = load_raw(path)
    return make_scenario(raw, cells_override=cells_override,
                         where=f"{path}: ")

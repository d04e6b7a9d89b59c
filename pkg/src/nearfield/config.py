"""Run-config parsing: YAML tree, unit-tagged quantities, validation."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Mapping, Optional

import yaml

from .geometry import ArrayGeometry, build_upa
from .mimo_los import SPEED_OF_LIGHT, RadioParams
from .regions import RegionBounds, boundary_distances


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


_FREQ_UNITS = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12}
_LENGTH_UNITS = {"m": 1.0, "mm": 1e-3, "cm": 1e-2, "km": 1e3}


def _split_quantity(value: str) -> tuple[float, str]:
    parts = value.split()
    if len(parts) != 2:
        raise ConfigError(f"expected '<number> <unit>', got {value!r}")
    try:
        return float(parts[0]), parts[1]
    except ValueError as exc:
        raise ConfigError(f"bad numeric value in {value!r}") from exc


def parse_frequency(value: Any, where: str) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        num, unit = _split_quantity(value)
        if unit.lower() not in _FREQ_UNITS:
            raise ConfigError(f"{where}: unknown frequency unit {unit!r}")
        return num * _FREQ_UNITS[unit.lower()]
    raise ConfigError(f"{where}: expected frequency, got {value!r}")


def parse_length(value: Any, where: str, wavelength: Optional[float] = None,
                 bounds: Optional[RegionBounds] = None) -> float:
    """Length in meters; accepts numbers (meters), 'inf', and unit-tagged
    strings ('2 m', '0.25 lambda', '1000 dF', '0.04 dFA', '1 dB')."""
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity"):
            return math.inf
        num, unit = _split_quantity(value)
        key = unit.lower()
        if key in _LENGTH_UNITS:
            return num * _LENGTH_UNITS[key]
        if key == "lambda":
            if wavelength is None:
                raise ConfigError(f"{where}: lambda units need a geometry block")
            return num * wavelength
        relative = {"df": "d_f", "dfa": "d_fa", "db": "d_b", "dn": "d_n"}
        if key in relative:
            if bounds is None:
                raise ConfigError(f"{where}: {unit} units need a geometry block")
            return num * getattr(bounds, relative[key])
        raise ConfigError(f"{where}: unknown length unit {unit!r}")
    raise ConfigError(f"{where}: expected length, got {value!r}")


def _require_mapping(node: Any, where: str) -> Mapping[str, Any]:
    if not isinstance(node, Mapping):
        raise ConfigError(f"{where}: expected a mapping block")
    return node


def _check_keys(node: Mapping[str, Any], allowed: set[str], where: str) -> None:
    unknown = set(node) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


@dataclass(frozen=True)
class RunConfig:
    """Parsed run configuration: geometry/radio blocks plus the raw
    experiment mapping for the chosen subcommand."""

    raw: Mapping[str, Any]
    geometry: Optional[ArrayGeometry]
    radio: Optional[RadioParams]
    experiment: Mapping[str, Any]
    output: Optional[str]

    @property
    def bounds(self) -> RegionBounds:
        if self.geometry is None:
            raise ConfigError("config has no geometry block")
        return boundary_distances(self.geometry)

    def length(self, value: Any, where: str) -> float:
        lam = self.geometry.wavelength if self.geometry else None
        bounds = boundary_distances(self.geometry) if self.geometry else None
        return parse_length(value, where, wavelength=lam, bounds=bounds)

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _parse_geometry(node: Mapping[str, Any]) -> ArrayGeometry:
    _check_keys(node, {"rows", "cols", "element_side", "wavelength",
                       "frequency"}, "geometry")
    for key in ("rows", "cols", "element_side"):
        if key not in node:
            raise ConfigError(f"geometry: missing key {key!r}")
    if ("wavelength" in node) == ("frequency" in node):
        raise ConfigError("geometry: set exactly one of wavelength/frequency")
    if "wavelength" in node:
        lam = parse_length(node["wavelength"], "geometry.wavelength")
    else:
        lam = SPEED_OF_LIGHT / parse_frequency(node["frequency"],
                                               "geometry.frequency")
    side = parse_length(node["element_side"], "geometry.element_side",
                        wavelength=lam)
    try:
        return build_upa(int(node["rows"]), int(node["cols"]), side, lam)
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from exc


def _parse_radio(node: Mapping[str, Any]) -> RadioParams:
    _check_keys(node, {"frequency", "power_over_noise_db", "bandwidth_fraction",
                       "bandwidth_hz", "tx_gain_model", "rx_gain_model"},
                "radio")
    for key in ("frequency", "power_over_noise_db"):
        if key not in node:
            raise ConfigError(f"radio: missing key {key!r}")
    kwargs: dict[str, Any] = {
        "carrier_frequency": parse_frequency(node["frequency"], "radio.frequency"),
        "power_over_noise_db": float(node["power_over_noise_db"]),
    }
    if "bandwidth_hz" in node:
        kwargs["bandwidth_hz"] = parse_frequency(node["bandwidth_hz"],
                                                 "radio.bandwidth_hz")
        kwargs["bandwidth_fraction"] = None
    elif "bandwidth_fraction" in node:
        kwargs["bandwidth_fraction"] = float(node["bandwidth_fraction"])
    for key in ("tx_gain_model", "rx_gain_model"):
        if key in node:
            kwargs[key] = str(node[key])
    try:
        return RadioParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"radio: {exc}") from exc


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path!r} is not valid YAML: {exc}") from exc
    if raw is None:
        raw = {}
    raw = _require_mapping(raw, "config root")
    _check_keys(raw, {"geometry", "radio", "experiment", "output"}, "config root")
    geometry = None
    if "geometry" in raw:
        geometry = _parse_geometry(_require_mapping(raw["geometry"], "geometry"))
    radio = None
    if "radio" in raw:
        radio = _parse_radio(_require_mapping(raw["radio"], "radio"))
    experiment = raw.get("experiment", {})
    if experiment is None:
        experiment = {}
    experiment = _require_mapping(experiment, "experiment")
    output = raw.get("output")
    return RunConfig(raw=raw, geometry=geometry, radio=radio,
                     experiment=experiment, output=output)

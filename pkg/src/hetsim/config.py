"""Scenario configuration: defaults, flat ``key = value`` parsing, validation."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields

from .access_game import PricingSpec
from .propagation import dbm_to_watts


class ConfigError(ValueError):
    pass


ACCESS_MODES = {"open": 0.0, "closed": 1.0, "hybrid": 0.5, "proposed": 0.75}


@dataclass(frozen=True)
class ScenarioConfig:
    # radio parameters
    carrier_mhz: float = 1800.0
    tp_mbs_w: float = 1500.0
    tp_fbs_mw: float = 15.0
    h_mbs_m: float = 75.0
    h_fbs_m: float = 3.0
    h_ms_m: float = 1.5
    subchannels: int = 30
    bandwidth_mhz: float = 5.5
    n_sub_indoor: int = 5
    n_non_indoor: int = 8
    n_non_outdoor: int = 10
    noise_figure_db: float = 9.0
    noise_density_dbm_hz: float = -175.0
    shadow_mbs_outdoor_db: float = 6.0
    shadow_mbs_indoor_db: float = 8.0
    shadow_fbs_outdoor_db: float = 8.0
    shadow_fbs_indoor_db: float = 3.0
    fs_loss_mbs_db: float = 10.0
    pen_mbs_db: float = 20.0
    pen_fbs_db: float = 20.0
    distance_mbs_fbs_m: float = 500.0
    sinr_thresh_mbs_db: float = 10.0
    sinr_thresh_out_db: float = 7.0
    # geometry
    mbs_radius_m: float = 1500.0
    room_m: float = 25.0
    with_femtocell: bool = True
    # game
    beta: float = 0.75
    chi: float = 1.0e5
    phi: float = 0.0
    delta_adjustor: float = 1.0
    delta_thresh_db: float = 5.0
    omega_thresh_db: float = 5.0
    femto_slope_m: float = 30.0
    # channel pools on the FBS (voice) and the optical access point (data)
    voice_channels: int = 8
    data_channels: int = 8
    seed: int = 0

    def __post_init__(self):
        positive = ("carrier_mhz", "tp_mbs_w", "tp_fbs_mw", "h_mbs_m", "h_fbs_m", "h_ms_m",
                    "subchannels", "bandwidth_mhz", "distance_mbs_fbs_m", "mbs_radius_m",
                    "room_m", "femto_slope_m", "delta_adjustor")
        non_negative = ("n_sub_indoor", "n_non_indoor", "n_non_outdoor", "noise_figure_db",
                        "shadow_mbs_outdoor_db", "shadow_mbs_indoor_db",
                        "shadow_fbs_outdoor_db", "shadow_fbs_indoor_db", "fs_loss_mbs_db",
                        "pen_mbs_db", "pen_fbs_db", "chi", "phi", "delta_thresh_db",
                        "omega_thresh_db", "voice_channels", "data_channels", "seed")
        for name in positive:
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v}")
        for name in non_negative:
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be non-negative, got {v}")
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if self.voice_channels + self.data_channels == 0:
            raise ConfigError("voice_channels + data_channels must be positive")
        half = self.room_m / 2
        if self.distance_mbs_fbs_m + half * math.sqrt(2) > self.mbs_radius_m:
            raise ConfigError("room must lie inside the MBS range")

    @property
    def bandwidth_hz(self) -> float:
        return self.bandwidth_mhz * 1e6

    @property
    def noise_dbm(self) -> float:
        return self.noise_density_dbm_hz + 10 * math.log10(self.bandwidth_hz) + self.noise_figure_db

    @property
    def noise_w(self) -> float:
        return dbm_to_watts(self.noise_dbm)

    @property
    def tp_fbs_w(self) -> float:
        return self.tp_fbs_mw * 1e-3

    @property
    def pricing(self) -> PricingSpec:
        return PricingSpec(chi=self.chi, phi=self.phi, delta=self.delta_adjustor)

    @property
    def fbs_xy(self) -> tuple[float, float]:
        return (self.distance_mbs_fbs_m, 0.0)

    def in_room(self, x, y):
        fx, fy = self.fbs_xy
        half = self.room_m / 2
        return (abs(x - fx) <= half) & (abs(y - fy) <= half)

    def replace(self, **changes) -> ScenarioConfig:
        return dataclasses.replace(self, **changes)


_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}


def _coerce(key: str, raw: str, lineno: int):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind == "int":
            v = float(raw)
            if v != int(v):
                raise ValueError(raw)
            return int(v)
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key}: cannot parse {raw!r} as {kind}") from None


def load_config(source: str) -> ScenarioConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Missing keys keep their defaults, unknown keys are rejected.
    """
    values = {}
    lines = {}
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = (s.strip() for s in line.partition("="))
        if key == "access_mode":
            if value not in ACCESS_MODES:
                raise ConfigError(f"line {lineno}: access_mode must be one of {sorted(ACCESS_MODES)}")
            key, value = "beta", str(ACCESS_MODES[value])
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value, lineno)
        lines[key] = lineno
    try:
        return ScenarioConfig(**values)
    except ConfigError as exc:
        bad = next((k for k in lines if str(exc).startswith(k)), None)
        if bad is not None:
            raise ConfigError(f"line {lines[bad]}: {exc}") from None
        raise


def load_config_file(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return load_config(fh.read())

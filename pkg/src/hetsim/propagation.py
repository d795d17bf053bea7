"""Large-scale path loss for the macro and femto tiers, and dB power helpers."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

# Frequency range over which the mobile antenna correction is nominally valid.
ANTENNA_CORRECTION_RANGE_MHZ = (200.0, 1500.0)


@dataclass(frozen=True)
class MacroPathLossParams:
    f_mhz: float = 1800.0
    h_base_m: float = 75.0
    h_ms_m: float = 1.5
    shadow_db: float = 0.0
    pen_db: float = 0.0

    def __post_init__(self):
        if self.f_mhz <= 0 or self.h_base_m <= 0 or self.h_ms_m <= 0:
            raise ValueError("frequency and antenna heights must be positive")
        if self.shadow_db < 0 or self.pen_db < 0:
            raise ValueError("shadow_db and pen_db must be non-negative")


@dataclass(frozen=True)
class FemtoPathLossParams:
    f_mhz: float = 1800.0
    slope_db_per_decade: float = 30.0
    wall_coeff_db: float = 4.4

    def __post_init__(self):
        if self.f_mhz <= 0 or self.slope_db_per_decade <= 0:
            raise ValueError("f_mhz and slope_db_per_decade must be positive")
        if self.wall_coeff_db < 0:
            raise ValueError("wall_coeff_db must be non-negative")


@dataclass(frozen=True)
class Position:
    x_m: float
    y_m: float

    def __post_init__(self):
        if not (math.isfinite(self.x_m) and math.isfinite(self.y_m)):
            raise ValueError("coordinates must be finite")

    def distance_to(self, other: Position) -> float:
        return math.hypot(self.x_m - other.x_m, self.y_m - other.y_m)


@dataclass(frozen=True)
class PowerLevel:
    """A strictly positive power, stored in dBm."""

    dbm: float

    def __post_init__(self):
        if not math.isfinite(self.dbm):
            raise ValueError("power must be finite in dBm (linear value > 0)")

    @classmethod
    def from_watts(cls, watts: float) -> PowerLevel:
        if watts <= 0:
            raise ValueError("power in watts must be positive")
        return cls(watts_to_dbm(watts))

    @property
    def watts(self) -> float:
        return dbm_to_watts(self.dbm)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def antenna_correction(h_ms_m: float, f_mhz: float) -> float:
    """Mobile antenna height correction A_M in dB.

    Outside 200-1500 MHz the formula is still applied; a notice is logged.
    """
    if h_ms_m <= 0:
        raise ValueError("h_ms_m must be positive")
    lo, hi = ANTENNA_CORRECTION_RANGE_MHZ
    if not lo <= f_mhz <= hi:
        log.info("antenna correction applied at %.0f MHz, outside %g-%g MHz", f_mhz, lo, hi)
    return 10.24 * math.log10(11.75 * h_ms_m) ** 2 - 4.97


def macro_path_loss(params: MacroPathLossParams, d_km: float, indoor: bool = False) -> float:
    """Macrocell loss in dB at ``d_km`` kilometres.

    ``params.shadow_db`` enters as a fixed margin; penetration loss only
    applies to indoor receivers.
    """
    if not d_km > 0:
        raise ValueError(f"d_km must be positive, got {d_km}")
    lb = math.log10(params.h_base_m)
    loss = (
        36.55
        + 26.16 * math.log10(params.f_mhz)
        - 13.82 * lb
        - antenna_correction(params.h_ms_m, params.f_mhz)
        + (44.9 - 6.55 * lb) * math.log10(d_km)
        + params.shadow_db
    )
    if indoor:
        loss += params.pen_db
    return loss


def femto_path_loss(params: FemtoPathLossParams, d_f_m: float, n_walls: int = 0) -> float:
    if not d_f_m > 0:
        raise ValueError(f"d_f_m must be positive, got {d_f_m}")
    if n_walls < 0 or int(n_walls) != n_walls:
        raise ValueError("n_walls must be a non-negative integer")
    return (
        20.0 * math.log10(params.f_mhz)
        + params.slope_db_per_decade * math.log10(d_f_m)
        + params.wall_coeff_db * n_walls**2
        - 28.0
    )


def received_power(tp: PowerLevel, loss_db: float) -> PowerLevel:
    if not math.isfinite(loss_db):
        raise ValueError("loss_db must be finite")
    return PowerLevel(tp.dbm - loss_db)


def sample_shadowing(shadow_db: float, rng: np.random.Generator, size=None):
    """Zero-mean normal shadowing draw(s) in dB."""
    if shadow_db < 0:
        raise ValueError("shadow_db must be non-negative")
    if shadow_db == 0:
        return 0.0 if size is None else np.zeros(size)
    return rng.normal(0.0, shadow_db, size=size)

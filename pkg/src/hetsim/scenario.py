"""Scenario assembly: UE placement, link budgets, coverage maps, game building."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import propagation as prop
from .access_game import (AccessGameSpec, PlayerPopulation, UESet, allowed_fbs_power,
                          classify_ue)
from .config import ScenarioConfig

MBS_XY = (0.0, 0.0)
# Closest MBS distance used in the macro formula; it diverges near the mast.
MIN_MACRO_DISTANCE_KM = 0.02


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream per (master seed, trial index)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def macro_params(config: ScenarioConfig) -> prop.MacroPathLossParams:
    return prop.MacroPathLossParams(f_mhz=config.carrier_mhz, h_base_m=config.h_mbs_m,
                                    h_ms_m=config.h_ms_m, shadow_db=0.0,
                                    pen_db=config.pen_mbs_db)


def femto_params(config: ScenarioConfig) -> prop.FemtoPathLossParams:
    return prop.FemtoPathLossParams(f_mhz=config.carrier_mhz,
                                    slope_db_per_decade=config.femto_slope_m)


def macro_loss_db(config: ScenarioConfig, x: float, y: float, indoor: bool,
                  shadow_db: float = 0.0) -> float:
    """MBS loss at (x, y) with the fixed free-space margin and a given shadowing term."""
    d_km = max(math.hypot(x - MBS_XY[0], y - MBS_XY[1]) / 1000.0, MIN_MACRO_DISTANCE_KM)
    return (prop.macro_path_loss(macro_params(config), d_km, indoor)
            + config.fs_loss_mbs_db + shadow_db)


def femto_loss_db(config: ScenarioConfig, x: float, y: float, indoor: bool,
                  shadow_db: float = 0.0) -> float:
    """FBS loss; indoor receivers share the FBS room, outdoor ones pay the wall."""
    fx, fy = config.fbs_xy
    d_f = math.sqrt((x - fx) ** 2 + (y - fy) ** 2 + (config.h_fbs_m - config.h_ms_m) ** 2)
    loss = prop.femto_path_loss(femto_params(config), d_f, 0) + shadow_db
    if not indoor:
        loss += config.pen_fbs_db
    return loss


@dataclass(frozen=True)
class Placement:
    subscribers: np.ndarray
    non_indoor: np.ndarray
    non_outdoor: np.ndarray


def _uniform_room(config: ScenarioConfig, n: int, rng) -> np.ndarray:
    fx, fy = config.fbs_xy
    half = config.room_m / 2
    pts = rng.uniform(-half, half, size=(n, 2))
    return pts + np.array([fx, fy])


def _uniform_outdoor(config: ScenarioConfig, n: int, rng) -> np.ndarray:
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        r = config.mbs_radius_m * np.sqrt(rng.uniform())
        theta = rng.uniform(0.0, 2 * math.pi)
        x, y = r * math.cos(theta), r * math.sin(theta)
        if config.in_room(x, y):
            continue
        out[filled] = (x, y)
        filled += 1
    return out


def place_ues(config: ScenarioConfig, rng: np.random.Generator) -> Placement:
    """Indoor UEs uniform in the room, outdoor ones uniform over the MBS disc
    minus the room."""
    return Placement(
        subscribers=_uniform_room(config, config.n_sub_indoor, rng),
        non_indoor=_uniform_room(config, config.n_non_indoor, rng),
        non_outdoor=_uniform_outdoor(config, config.n_non_outdoor, rng),
    )


@dataclass(frozen=True)
class LinkBudget:
    """Per-UE received powers (dBm) from both cells."""

    rp_mbs_dbm: np.ndarray
    rp_fbs_dbm: np.ndarray
    indoor: np.ndarray

    def gains(self, config: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
        """Linear (MBS, FBS) channel gains."""
        g_m = 10 ** ((self.rp_mbs_dbm - prop.watts_to_dbm(config.tp_mbs_w)) / 10)
        g_f = 10 ** ((self.rp_fbs_dbm - prop.watts_to_dbm(config.tp_fbs_w)) / 10)
        return g_m, g_f


def link_budget(config: ScenarioConfig, xy: np.ndarray, indoor: np.ndarray,
                rng: np.random.Generator | None = None) -> LinkBudget:
    """Received powers for UEs at ``xy``.

    With ``rng`` each link gets an independent shadowing draw; without it the
    macro links carry the shadowing deviation as a fixed margin and femto
    links carry none.
    """
    tp_m = prop.watts_to_dbm(config.tp_mbs_w)
    tp_f = prop.watts_to_dbm(config.tp_fbs_w)
    rp_m = np.empty(len(xy))
    rp_f = np.empty(len(xy))
    for i, ((x, y), ind) in enumerate(zip(xy, indoor)):
        sd_m = config.shadow_mbs_indoor_db if ind else config.shadow_mbs_outdoor_db
        sd_f = config.shadow_fbs_indoor_db if ind else config.shadow_fbs_outdoor_db
        if rng is None:
            sh_m, sh_f = sd_m, 0.0
        else:
            sh_m = prop.sample_shadowing(sd_m, rng)
            sh_f = prop.sample_shadowing(sd_f, rng)
        rp_m[i] = tp_m - macro_loss_db(config, x, y, bool(ind), sh_m)
        rp_f[i] = tp_f - femto_loss_db(config, x, y, bool(ind), sh_f) if config.with_femtocell else -np.inf
    return LinkBudget(rp_m, rp_f, np.asarray(indoor, dtype=bool))


# -- coverage maps -----------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    x_min: float
    y_min: float
    cell_m: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or not self.cell_m > 0:
            raise ValueError("grid needs at least one cell and a positive cell size")

    @classmethod
    def around_fbs(cls, config: ScenarioConfig, nx: int = 100, ny: int = 100,
                   extent_m: float | None = None) -> GridSpec:
        """Square grid centred on the FBS, four room widths across by default."""
        extent = extent_m if extent_m is not None else 4 * config.room_m
        cell = extent / max(nx, ny)
        fx, fy = config.fbs_xy
        return cls(fx - cell * nx / 2, fy - cell * ny / 2, cell, nx, ny)

    def centres(self) -> tuple[np.ndarray, np.ndarray]:
        xs = self.x_min + (np.arange(self.nx) + 0.5) * self.cell_m
        ys = self.y_min + (np.arange(self.ny) + 0.5) * self.cell_m
        return xs, ys


@dataclass(frozen=True)
class CoverageGrid:
    grid: GridSpec
    values: np.ndarray  # shape (ny, nx)
    server: np.ndarray  # "MBS" / "FBS", shape (ny, nx)
    quantity: str  # "loss_db" or "rp_dbm"


def coverage_map(config: ScenarioConfig, grid: GridSpec,
                 with_femtocell: bool = True) -> tuple[CoverageGrid, CoverageGrid]:
    """Best-server loss map and received-power map.

    The serving cell is the one with the smaller loss; the power map shows
    the strongest received power.  Shadowing enters as a fixed margin.
    """
    xs, ys = grid.centres()
    tp_m = prop.watts_to_dbm(config.tp_mbs_w)
    tp_f = prop.watts_to_dbm(config.tp_fbs_w)
    loss = np.empty((grid.ny, grid.nx))
    rp = np.empty((grid.ny, grid.nx))
    server = np.full((grid.ny, grid.nx), "MBS", dtype=object)
    for j, y in enumerate(ys):
        for i, x in enumerate(xs):
            indoor = bool(config.in_room(x, y))
            sd = config.shadow_mbs_indoor_db if indoor else config.shadow_mbs_outdoor_db
            lm = macro_loss_db(config, x, y, indoor, sd)
            loss[j, i], rp[j, i] = lm, tp_m - lm
            if with_femtocell:
                lf = femto_loss_db(config, x, y, indoor)
                if lf < lm:
                    loss[j, i], server[j, i] = lf, "FBS"
                rp[j, i] = max(rp[j, i], tp_f - lf)
    return (CoverageGrid(grid, loss, server, "loss_db"),
            CoverageGrid(grid, rp, server.copy(), "rp_dbm"))


# -- game assembly -----------------------------------------------------------

@dataclass(frozen=True)
class Trial:
    """One Monte Carlo draw: placement, link budget and the game it induces."""

    spec: AccessGameSpec
    placement: Placement
    budget: LinkBudget
    role: np.ndarray  # per UE: "sub", "player", "dstar"
    worst: int  # index of the UE whose gains parameterize the game
    degenerate: bool  # no players in D

    @property
    def players(self) -> np.ndarray:
        return np.flatnonzero(self.role == "player")


def build_trial(config: ScenarioConfig, rng: np.random.Generator) -> Trial:
    """Place UEs, draw shadowing and assemble the cell-selection game.

    UE order is subscribers, indoor nonsubscribers, outdoor nonsubscribers.
    """
    placement = place_ues(config, rng)
    xy = np.vstack([placement.subscribers, placement.non_indoor, placement.non_outdoor])
    n_sub, n_in = len(placement.subscribers), len(placement.non_indoor)
    indoor = np.arange(len(xy)) < n_sub + n_in
    budget = link_budget(config, xy, indoor, rng)
    if len(xy) == 0:
        raise ValueError("scenario has no UEs")

    role = np.empty(len(xy), dtype=object)
    role[:n_sub] = "sub"
    for i in range(n_sub, len(xy)):
        in_d = classify_ue(budget.rp_fbs_dbm[i], budget.rp_mbs_dbm[i]) is UESet.D
        role[i] = "player" if in_d else "dstar"

    g_m, g_f = budget.gains(config)
    # Worst FBS-side UE: lowest femto-over-macro margin among players, or
    # among subscribers when nobody plays.
    candidates = np.flatnonzero(role == "player")
    if len(candidates) == 0:
        candidates = np.flatnonzero(role == "sub")
    if len(candidates) == 0:
        candidates = np.arange(len(xy))
    margin = budget.rp_fbs_dbm[candidates] - budget.rp_mbs_dbm[candidates]
    worst = int(candidates[np.argmin(margin)])

    probe = AccessGameSpec(bandwidth_hz=config.bandwidth_hz, beta=config.beta,
                           population=PlayerPopulation(),
                           tp_max_fbs_w=config.tp_fbs_w,
                           delta_thresh_db=config.delta_thresh_db,
                           omega_thresh_db=config.omega_thresh_db)
    dstar = np.flatnonzero(role == "dstar")
    gated = sum(1 for i in dstar
                if allowed_fbs_power(probe, budget.rp_mbs_dbm[i], budget.rp_fbs_dbm[i]) == 0.0)
    n_players = int(np.count_nonzero(role == "player"))
    fbs_on = config.with_femtocell
    spec = AccessGameSpec(
        bandwidth_hz=config.bandwidth_hz,
        beta=config.beta,
        population=PlayerPopulation(p_sub=n_sub, p_non=len(dstar), p_players=n_players),
        pricing=config.pricing,
        noise_w=config.noise_w,
        tp_max_mbs_w=config.tp_mbs_w,
        tp_max_fbs_w=config.tp_fbs_w if fbs_on else 0.0,
        gain_fbs_link=float(g_f[worst]) if fbs_on else 1e-300,
        gain_mbs_link=float(g_m[worst]),
        delta_thresh_db=config.delta_thresh_db,
        omega_thresh_db=config.omega_thresh_db,
        gated_slots=gated,
        macro_interference_w=config.tp_fbs_w * float(g_f[worst]) if fbs_on else 0.0,
    )
    return Trial(spec, placement, budget, role, worst, n_players == 0)


def build_game(config: ScenarioConfig, rng: np.random.Generator) -> AccessGameSpec:
    return build_trial(config, rng).spec

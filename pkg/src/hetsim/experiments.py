"""Monte Carlo experiments: sweeps, capacity CDFs and the outage comparison.

Every trial draws from its own stream seeded by (master seed, trial index),
so results do not depend on the order or process in which trials run.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import sinr_outage as so
from .access_game import (AccessGameSpec, PlayerPopulation, PricingSpec, allowed_fbs_power,
                          enumerate_ne_bruteforce, fbs_capacity, find_ne, operator_revenue,
                          subscriber_share)
from .channel_alloc import AllocationRequest, ChannelPool, Kind
from .config import ScenarioConfig
from .propagation import db_to_linear, dbm_to_watts
from .scenario import Trial, _uniform_outdoor, _uniform_room, build_trial, link_budget, trial_rng

SWEEP_VARIABLES = ("distance", "price", "users", "beta")
DEFAULT_TRIALS = 1000


@dataclass(frozen=True)
class TrialResult:
    sub_capacity_bps: float
    sys_capacity_bps: float
    ne_femto_count: int
    revenue: float
    outage: float
    utilization: float
    degenerate: bool


@dataclass(frozen=True)
class SweepRecord:
    variable: str
    value: float
    trials: int
    mean_sub_capacity_bps: float
    mean_sys_capacity_bps: float
    ne_femto_count_mean: float
    revenue_mean: float
    outage_mean: float
    utilization_mean: float
    ci_halfwidth: float  # 95% half-width of mean_sys_capacity_bps


def _ue_outages(config: ScenarioConfig, trial: Trial, femto_served: np.ndarray) -> np.ndarray:
    """Closed-form outage of every UE at its large-scale mean SINR.

    FBS-served UEs share the band with the MBS.  On the slot of an
    MBS-served UE the FBS obeys the power gate, except for macro players:
    they sit in D and accept the stronger FBS signal as interference.
    """
    spec = trial.spec
    g_m, g_f = trial.budget.gains(config)
    topo = so.Topology(mbs=(0,), fap=(0,), mue=(0,), fue=(0,))
    noise = so.NoiseAndThreshold(spec.noise_w, spec.noise_w, spec.noise_w, 1.0)
    varpi_mbs = db_to_linear(config.sinr_thresh_mbs_db)
    varpi_fbs = db_to_linear(config.sinr_thresh_out_db)
    out = np.empty(len(g_m))
    for i in range(len(g_m)):
        real = so.ChannelRealizationVector()
        for cat in (so.LinkCategory.MBS_MUE, so.LinkCategory.MBS_FUE):
            real[(cat, 0, 0, 0)] = math.sqrt(g_m[i])
        for cat in (so.LinkCategory.FAP_MUE, so.LinkCategory.FAP_FUE):
            real[(cat, 0, 0, 0)] = math.sqrt(g_f[i]) if g_f[i] > 0 else 0.0
        alloc = so.PowerAllocation()
        alloc.set(so.TxClass.MBS, 0, [spec.tp_max_mbs_w])
        if femto_served[i]:
            alloc.set(so.TxClass.FAP, 0, [spec.tp_max_fbs_w])
            s, varpi = so.sinr(so.Tier.FUE, 0, 0, 0, real, alloc, noise), varpi_fbs
        else:
            if trial.role[i] == "player":
                p_fbs = spec.tp_max_fbs_w
            else:
                p_fbs = allowed_fbs_power(spec, trial.budget.rp_mbs_dbm[i],
                                          trial.budget.rp_fbs_dbm[i])
            alloc.set(so.TxClass.FAP, 0, [p_fbs])
            s, varpi = so.sinr(so.Tier.MUE, 0, 0, 0, real, alloc, noise), varpi_mbs
        out[i] = so.outage_probability(s, varpi) if s > 0 else 1.0
    return out


def evaluate_trial(config: ScenarioConfig, trial_index: int) -> TrialResult:
    """Build the game for one trial, solve it and measure the equilibrium."""
    rng = trial_rng(config.seed, trial_index)
    trial = build_trial(config, rng)
    spec = trial.spec
    ne = find_ne(spec)
    p = ne.p_femto
    pop = spec.population
    cap = fbs_capacity(spec, p)
    g_m, g_f = trial.budget.gains(config)

    # Subscribers are measured on their own links; the game itself only
    # sees the worst-case pair.
    share = subscriber_share(spec.beta, p, pop.p_sub) if pop.p_sub else 0.0
    sub_rates = [share * fbs_capacity(replace(spec, gain_fbs_link=max(float(g_f[i]), 1e-300),
                                              gain_mbs_link=float(g_m[i])), p)
                 for i in np.flatnonzero(trial.role == "sub")]
    sub_cap = float(np.mean(sub_rates)) if sub_rates else 0.0
    femto_rate = (1.0 - spec.beta) / (pop.p_sub + p) * cap if p else 0.0
    mbs_served = pop.p_non + pop.p_players - p
    rates = sub_rates + [femto_rate] * p
    if p < pop.p_players:
        rates += [spec.u1(p)] * (pop.p_players - p)
    for i in np.flatnonzero(trial.role == "dstar"):
        ap = allowed_fbs_power(spec, trial.budget.rp_mbs_dbm[i], trial.budget.rp_fbs_dbm[i])
        snr = spec.tp_max_mbs_w * g_m[i] / (spec.noise_w + ap * g_f[i])
        rates.append(spec.bandwidth_hz / mbs_served * math.log2(1.0 + snr))
    sys_cap = float(np.mean(rates))

    femto_served = trial.role == "sub"
    players = trial.players
    for idx, choice in zip(players, ne.profile):
        femto_served[idx] = choice == 0
    outage = float(np.mean(_ue_outages(config, trial, femto_served)))

    pool = ChannelPool(config.voice_channels, config.data_channels)
    for idx in np.flatnonzero(femto_served):
        kind = Kind.VOICE if rng.random() < 0.5 else Kind.DATA
        pool.request(AllocationRequest(kind, int(idx)))
        pool.rebalance()
    return TrialResult(sub_cap, sys_cap, p, operator_revenue(spec.pricing, p), outage,
                       pool.utilization(), trial.degenerate)


def _evaluate_many(config: ScenarioConfig, trials: int, workers: int = 1) -> list[TrialResult]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if workers <= 1:
        return [evaluate_trial(config, t) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(evaluate_trial, [config] * trials, range(trials),
                             chunksize=max(1, trials // (4 * workers))))


def apply_variable(config: ScenarioConfig, variable: str, value: float) -> ScenarioConfig:
    if variable == "distance":
        return config.replace(distance_mbs_fbs_m=float(value))
    if variable == "price":
        return config.replace(phi=float(value))
    if variable == "beta":
        return config.replace(beta=float(value))
    if variable == "users":
        # total nonsubscribers, split indoor/outdoor like the default scenario
        total = int(round(value))
        if total < 0:
            raise ValueError("user count must be non-negative")
        n_in = int(round(total * 8 / 18))
        return config.replace(n_non_indoor=n_in, n_non_outdoor=total - n_in)
    raise ValueError(f"unknown sweep variable {variable!r}; pick one of {SWEEP_VARIABLES}")


def summarize(variable: str, value: float, results: list[TrialResult]) -> SweepRecord:
    n = len(results)
    sys_caps = np.array([r.sys_capacity_bps for r in results])
    half = 1.96 * float(np.std(sys_caps, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    return SweepRecord(
        variable=variable,
        value=float(value),
        trials=n,
        mean_sub_capacity_bps=float(np.mean([r.sub_capacity_bps for r in results])),
        mean_sys_capacity_bps=float(np.mean(sys_caps)),
        ne_femto_count_mean=float(np.mean([r.ne_femto_count for r in results])),
        revenue_mean=float(np.mean([r.revenue for r in results])),
        outage_mean=float(np.mean([r.outage for r in results])),
        utilization_mean=float(np.mean([r.utilization for r in results])),
        ci_halfwidth=half,
    )


def sweep_grid(start: float, stop: float, steps: int) -> list[float]:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if steps == 1:
        return [float(start)]
    return [float(v) for v in np.linspace(start, stop, steps)]


def run_sweep(config: ScenarioConfig, variable: str, grid, trials: int = DEFAULT_TRIALS,
              workers: int = 1) -> list[SweepRecord]:
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    if variable not in SWEEP_VARIABLES:
        raise ValueError(f"unknown sweep variable {variable!r}; pick one of {SWEEP_VARIABLES}")
    records = []
    for value in grid:
        cfg = apply_variable(config, variable, value)
        records.append(summarize(variable, value, _evaluate_many(cfg, trials, workers)))
    return records


@dataclass(frozen=True)
class CDF:
    sub_capacity_bps: np.ndarray
    sys_capacity_bps: np.ndarray
    fraction: np.ndarray


def capacity_cdf(config: ScenarioConfig, trials: int = DEFAULT_TRIALS, workers: int = 1) -> CDF:
    """Empirical CDFs of subscriber and system capacity at the equilibrium."""
    results = _evaluate_many(config, trials, workers)
    n = len(results)
    return CDF(np.sort([r.sub_capacity_bps for r in results]),
               np.sort([r.sys_capacity_bps for r in results]),
               np.arange(1, n + 1) / n)


# -- outage comparison against a macro-only deployment -------------------------

@dataclass(frozen=True)
class OutagePoint:
    users: int
    proposed: float
    macro_only: float


def _outage_draw(config: ScenarioConfig, users: int, rng: np.random.Generator):
    """Mean outage for one drop of ``users`` UEs, proposed vs macro-only.

    Both deployments see the same UEs and shadowing.  The MBS admits users
    in arrival order up to ``subchannels``; anyone left over is in outage.
    In the proposed deployment UEs in D first ask the FBS/optical pools,
    which run on channels of their own, and fall back to the MBS.
    """
    share = (config.n_sub_indoor + config.n_non_indoor) / max(
        1, config.n_sub_indoor + config.n_non_indoor + config.n_non_outdoor)
    n_in = int(round(users * share))
    xy = np.vstack([_uniform_room(config, n_in, rng),
                    _uniform_outdoor(config, users - n_in, rng)])
    indoor = np.arange(users) < n_in
    budget = link_budget(config, xy, indoor, rng)
    kinds = rng.random(users) < 0.5
    noise_w = config.noise_w
    varpi_mbs = db_to_linear(config.sinr_thresh_mbs_db)
    varpi_fbs = db_to_linear(config.sinr_thresh_out_db)
    snr_m = dbm_to_watts(budget.rp_mbs_dbm) / noise_w
    snr_f = dbm_to_watts(budget.rp_fbs_dbm) / noise_w

    macro = np.ones(users)
    served = min(users, config.subchannels)
    for i in range(served):
        macro[i] = so.outage_probability(snr_m[i], varpi_mbs)

    proposed = np.ones(users)
    # arrivals only: preemption would merely swap one served user for another
    pool = ChannelPool(config.voice_channels, config.data_channels, preemptive=False)
    mbs_load = 0
    for i in range(users):
        if budget.rp_fbs_dbm[i] > budget.rp_mbs_dbm[i]:
            kind = Kind.VOICE if kinds[i] else Kind.DATA
            if pool.request(AllocationRequest(kind, i)).outcome.value != "rejected":
                pool.rebalance()
                proposed[i] = so.outage_probability(snr_f[i], varpi_fbs)
                continue
        if mbs_load < config.subchannels:
            mbs_load += 1
            proposed[i] = so.outage_probability(snr_m[i], varpi_mbs)
    return float(proposed.mean()), float(macro.mean())


def outage_comparison(config: ScenarioConfig, user_counts, trials: int = 100) -> list[OutagePoint]:
    points = []
    for users in user_counts:
        pairs = [_outage_draw(config, int(users),
                              np.random.default_rng(np.random.SeedSequence(
                                  [config.seed, t, int(users)])))
                 for t in range(trials)]
        arr = np.array(pairs)
        points.append(OutagePoint(int(users), float(arr[:, 0].mean()), float(arr[:, 1].mean())))
    return points


# -- solver vs brute-force oracle ---------------------------------------------

def random_game(config: ScenarioConfig, rng: np.random.Generator, max_players: int) -> AccessGameSpec:
    """A game with the scenario's radio constants and random population,
    gains, sharing ratio and price."""
    p_players = int(rng.integers(1, max_players + 1))
    p_non = int(rng.integers(0, 10))
    g_f = 10 ** rng.uniform(-12, -5)
    return AccessGameSpec(
        bandwidth_hz=config.bandwidth_hz,
        beta=float(rng.uniform()),
        population=PlayerPopulation(int(rng.integers(0, 8)), p_non, p_players),
        pricing=PricingSpec(chi=config.chi, phi=float(rng.uniform(0, 5)),
                            delta=config.delta_adjustor),
        noise_w=config.noise_w,
        tp_max_mbs_w=config.tp_mbs_w,
        tp_max_fbs_w=config.tp_fbs_w,
        gain_fbs_link=g_f,
        gain_mbs_link=10 ** rng.uniform(-16, -9),
        gated_slots=int(rng.integers(0, p_non + 1)),
        macro_interference_w=config.tp_fbs_w * g_f * float(rng.integers(0, 2)),
    )


def ne_oracle_check(config: ScenarioConfig, games: int = 1000,
                    max_players: int = 12) -> tuple[int, list[AccessGameSpec]]:
    """Solve random games and compare with exhaustive search.

    Returns the number of games checked and the ones where the solver's
    equilibrium is missing from the brute-force set.
    """
    if not 1 <= max_players <= 20:
        raise ValueError("max_players must lie in [1, 20]")
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, max_players]))
    failures = []
    for _ in range(games):
        game = random_game(config, rng, max_players)
        if find_ne(game).profile not in enumerate_ne_bruteforce(game):
            failures.append(game)
    return games, failures

"""The ten acceptance criteria, each at its stated tolerance and time limit.

Every test records one PASS/FAIL line; the lines are printed together at
the end of the pytest run.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from conftest import ACCEPTANCE_LINES
from hetsim import access_game as ag
from hetsim import experiments as ex
from hetsim import output
from hetsim import propagation as prop
from hetsim import sinr_outage as so
from hetsim.channel_alloc import AllocationRequest, ChannelPool, Kind
from hetsim.config import ScenarioConfig
from hetsim.scenario import GridSpec, coverage_map

CFG = ScenarioConfig()


def report(number: int, name: str, ok: bool, detail: str):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {name} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_1_ne_matches_bruteforce():
    start = time.perf_counter()
    games, failures = ex.ne_oracle_check(CFG, games=1000, max_players=12)
    elapsed = time.perf_counter() - start
    report(1, "NE solver vs brute force", not failures and elapsed < 30,
           f"{games - len(failures)}/{games} games, {elapsed:.1f} s")


def _sign(x: float, scale: float) -> int:
    if abs(x) <= 1e-12 * max(scale, 1.0):
        return 0
    return 1 if x > 0 else -1


def test_2_ordinal_potential():
    rng = np.random.default_rng(np.random.SeedSequence([CFG.seed, 2]))
    cfg = CFG.replace(phi=1.0)
    mismatches = 0
    trials = 10_000
    for _ in range(trials):
        game = ex.random_game(cfg, rng, 12)
        profile = [int(v) for v in rng.integers(0, 2, game.p_players)]
        i = int(rng.integers(game.p_players))
        dev = profile.copy()
        dev[i] = 1 - dev[i]
        u_old, u_new = ag.player_utility(game, profile, i), ag.player_utility(game, dev, i)
        phi_old, phi_new = ag.potential(game, profile), ag.potential(game, dev)
        d_u = _sign(u_new - u_old, max(abs(u_new), abs(u_old)))
        d_phi = _sign(phi_new - phi_old, max(abs(u_new), abs(u_old)))
        mismatches += d_u != d_phi
    report(2, "ordinal potential", mismatches == 0,
           f"{trials - mismatches}/{trials} deviations agree in sign")


def test_3_outage_closed_form_vs_monte_carlo():
    start = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence([CFG.seed, 3]))
    errors = []
    for ratio in (0.1, 1.0, 10.0):
        closed = so.outage_probability(1.0, ratio)
        errors.append(abs(so.empirical_outage(1.0, ratio, 10**6, rng) - closed))
    elapsed = time.perf_counter() - start
    report(3, "outage closed form vs Monte Carlo", max(errors) < 0.005 and elapsed < 10,
           f"max error {max(errors):.5f}, {elapsed:.2f} s")


def test_4_path_loss_golden_values():
    cases = [
        (prop.macro_path_loss(prop.MacroPathLossParams(1800, 75, 1.5), 1.0), 84.86),
        (prop.macro_path_loss(prop.MacroPathLossParams(1800, 75, 1.5, 8, 20), 1.0, True), 112.86),
        (prop.macro_path_loss(prop.MacroPathLossParams(1800, 75, 1.5, 8, 20), 0.5, True), 103.05),
        (prop.femto_path_loss(prop.FemtoPathLossParams(1800, 30), 10, 2), 84.71),
        (prop.femto_path_loss(prop.FemtoPathLossParams(1800, 30), 1, 0), 37.11),
    ]
    worst = max(abs(got - want) for got, want in cases)
    report(4, "path-loss golden values", worst <= 0.01, f"worst deviation {worst:.4f} dB")


def test_5_coverage_improvement():
    start = time.perf_counter()
    grid = GridSpec.around_fbs(CFG, 100, 100)
    with_f, _ = coverage_map(CFG, grid, True)
    without, _ = coverage_map(CFG, grid, False)
    elapsed = time.perf_counter() - start
    xs, ys = grid.centres()
    X, Y = np.meshgrid(xs, ys)
    room = CFG.in_room(X, Y)
    never_worse = bool(np.all(with_f.values <= without.values))
    reduced = float(np.mean(with_f.values[room] < without.values[room]))
    report(5, "coverage improvement", never_worse and reduced >= 0.95 and elapsed < 5,
           f"never worse={never_worse}, in-room reduced {reduced:.1%}, {elapsed:.2f} s")


def test_6_distance_trend():
    start = time.perf_counter()
    grid = ex.sweep_grid(100, 1000, 10)
    recs = ex.run_sweep(CFG, "distance", grid, trials=200)
    elapsed = time.perf_counter() - start
    rho_sub = spearmanr(grid, [r.mean_sub_capacity_bps for r in recs])[0]
    rho_sys = spearmanr(grid, [r.mean_sys_capacity_bps for r in recs])[0]
    report(6, "capacity grows with MBS-FBS distance",
           rho_sub > 0.9 and rho_sys > 0.9 and elapsed < 60,
           f"rho subscriber {rho_sub:.3f}, rho system {rho_sys:.3f}, {elapsed:.1f} s")


def test_7_revenue_peak():
    start = time.perf_counter()
    prices = ex.sweep_grid(0.0, 5.0, 20)
    recs = ex.run_sweep(CFG, "price", prices, trials=200)
    elapsed = time.perf_counter() - start
    revenue = [r.revenue_mean for r in recs]
    best = int(np.argmax(revenue))
    report(7, "interior revenue peak", 0 < best < len(prices) - 1 and elapsed < 60,
           f"peak at phi={prices[best]:.3g} (index {best} of {len(prices)}), {elapsed:.1f} s")


def _replay_utilization(pool: ChannelPool, seq) -> float:
    total = 0.0
    for is_request, uid, kind in seq:
        if is_request:
            pool.request(AllocationRequest(kind, uid))
        elif uid in pool.holders:
            pool.release(uid)
        pool.rebalance()
        total += pool.utilization()
    return total / len(seq)


def test_8_allocation_dominance():
    start = time.perf_counter()
    rng = np.random.default_rng(np.random.SeedSequence([CFG.seed, 8]))
    worse = strict = 0
    sequences = 1000
    for _ in range(sequences):
        nv, nd = (int(v) for v in rng.integers(1, 9, 2))
        users = int(rng.integers(4, 30))
        kinds = [Kind.VOICE if k else Kind.DATA for k in rng.random(users) < rng.uniform(0.1, 0.9)]
        seq = [(bool(rng.random() < 0.65), uid, kinds[uid])
               for uid in (int(u) for u in rng.integers(0, users, 60))]
        tunable = _replay_utilization(ChannelPool(nv, nd), seq)
        static = _replay_utilization(ChannelPool(nv, nd, allow_borrowing=False), seq)
        worse += tunable < static - 1e-12
        strict += tunable > static + 1e-12
    elapsed = time.perf_counter() - start
    report(8, "tunable allocation dominates static",
           worse == 0 and strict >= 0.1 * sequences and elapsed < 10,
           f"{worse} worse, {strict}/{sequences} strictly better, {elapsed:.1f} s")


def test_9_outage_comparison():
    start = time.perf_counter()
    points = ex.outage_comparison(CFG, range(5, 55, 5), trials=100)
    elapsed = time.perf_counter() - start
    bad = [p.users for p in points if p.proposed > p.macro_only]
    report(9, "proposed outage <= macro-only", not bad and elapsed < 60,
           f"violations at {bad or 'no'} user counts, {elapsed:.1f} s")


def _all_outputs(workers: int) -> list[str]:
    loss, rp = coverage_map(CFG, GridSpec.around_fbs(CFG, 30, 30))
    sweep = ex.run_sweep(CFG, "users", [10, 30], trials=12, workers=workers)
    cdf = ex.capacity_cdf(CFG, trials=12, workers=workers)
    return [output.grid_csv(loss, rp), output.heatmap_svg(loss), output.heatmap_svg(rp),
            output.sweep_csv(sweep), output.cdf_csv(cdf)]


def test_10_determinism(tmp_path):
    runs = [_all_outputs(1), _all_outputs(1), _all_outputs(4)]
    files = []
    for r, texts in enumerate(runs):
        files.append([output.write_text(tmp_path / f"run{r}_{i}.out", t).read_bytes()
                      for i, t in enumerate(texts)])
    same = files[0] == files[1] == files[2]
    report(10, "byte-identical outputs", same,
           f"{len(files[0])} files, two serial runs and one with 4 workers")

from __future__ import annotations

import dataclasses
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetsim import access_game as ag
from hetsim.config import ScenarioConfig
from hetsim.experiments import random_game


def toy_game(p_players=2):
    # u0 = 6/p, u1 = 4/m with m = P - p players on the MBS
    return ag.TabularGame(p_players, lambda p: 6.0 / p, lambda p: 4.0 / (p_players - p))


def spec_with(**kw):
    base = dict(bandwidth_hz=10e6, beta=0.5,
                population=ag.PlayerPopulation(p_sub=2, p_non=3, p_players=4))
    base.update(kw)
    return ag.AccessGameSpec(**base)


# -- classification, gate, capacity -------------------------------------------

def test_classify_ue():
    assert ag.classify_ue(-60, -80) is ag.UESet.D
    assert ag.classify_ue(-90, -80) is ag.UESet.D_STAR
    assert ag.classify_ue(-70, -70) is ag.UESet.D_STAR


def test_allowed_fbs_power_gate():
    spec = spec_with(tp_max_fbs_w=0.015, delta_thresh_db=5, omega_thresh_db=5)
    assert ag.allowed_fbs_power(spec, -60, -90) == 0.015
    assert ag.allowed_fbs_power(spec, -90, -60) == 0.0
    assert ag.allowed_fbs_power(spec, -60, -70) == 0.015  # boundary included


def test_fbs_capacity_example():
    noise, g_m = 1e-13, 1e-30
    g_f = 15 * (noise + 1500 * g_m) / 0.015  # SINR = 15, log2(16) = 4
    spec = spec_with(bandwidth_hz=20e6, noise_w=noise, gain_mbs_link=g_m, gain_fbs_link=g_f,
                     population=ag.PlayerPopulation(p_sub=1, p_non=4, p_players=0),
                     gated_slots=2)
    assert ag.fbs_capacity(spec, 0) == pytest.approx(40e6, rel=1e-9)
    assert ag.fbs_capacity(dataclasses.replace(spec, gated_slots=4), 0) == 0.0
    assert ag.fbs_capacity(dataclasses.replace(spec, tp_max_fbs_w=0.0), 0) == 0.0


def test_fbs_capacity_zero_when_nobody_on_mbs():
    spec = spec_with(population=ag.PlayerPopulation(p_sub=1, p_non=0, p_players=2))
    assert ag.fbs_capacity(spec, 2) == 0.0


def test_fbs_capacity_domain():
    with pytest.raises(ValueError):
        ag.fbs_capacity(spec_with(), 5)
    with pytest.raises(ValueError):
        ag.fbs_capacity(spec_with(), -1)


def test_capacity_non_increasing_in_gated_slots():
    caps = [ag.fbs_capacity(spec_with(gated_slots=z), 1) for z in range(0, 7)]
    assert all(a >= b for a, b in zip(caps, caps[1:]))
    assert caps[-1] == 0.0


# -- utilities ----------------------------------------------------------------

def test_mbs_utility_example():
    noise = 1e-13
    spec = spec_with(bandwidth_hz=10e6, noise_w=noise, gain_mbs_link=15 * noise / 1500,
                     population=ag.PlayerPopulation(p_sub=1, p_non=2, p_players=4))
    # 2 + 4 - 1 = 5 users on the MBS, SNR 15
    assert ag.utility(spec, ag.MBS, 1) == pytest.approx(8e6, rel=1e-9)


def test_fbs_utility_with_closed_access_is_minus_price():
    pricing = ag.PricingSpec(chi=10, phi=2, delta=3)
    spec = spec_with(beta=1.0, pricing=pricing)
    assert ag.utility(spec, ag.FBS, 2) == pytest.approx(-60.0)


def test_fbs_utility_degenerate_sharing():
    spec = spec_with(beta=0.0, population=ag.PlayerPopulation(p_sub=0, p_non=3, p_players=4))
    assert ag.utility(spec, ag.FBS, 1) == pytest.approx(ag.fbs_capacity(spec, 1))


@pytest.mark.parametrize("choice, count", [(ag.FBS, 0), (ag.FBS, 5), (ag.MBS, 4), (ag.MBS, -1)])
def test_utility_domain(choice, count):
    with pytest.raises(ValueError):
        ag.utility(spec_with(), choice, count)


def test_utility_rejects_unknown_choice():
    with pytest.raises(ValueError):
        ag.utility(spec_with(), 2, 1)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 10), st.floats(0, 10),
       st.integers(1, 4))
def test_fbs_utility_non_increasing_in_beta_and_price(b1, b2, phi1, phi2, p):
    lo_b, hi_b = sorted((b1, b2))
    lo_p, hi_p = sorted((phi1, phi2))
    a = spec_with(beta=lo_b, pricing=ag.PricingSpec(chi=1e5, phi=lo_p))
    b = spec_with(beta=hi_b, pricing=ag.PricingSpec(chi=1e5, phi=hi_p))
    assert ag.utility(b, ag.FBS, p) <= ag.utility(a, ag.FBS, p) + 1e-9


def test_spec_validation():
    with pytest.raises(ValueError):
        spec_with(beta=1.5)
    with pytest.raises(ValueError):
        spec_with(gain_fbs_link=0.0)
    with pytest.raises(ValueError):
        spec_with(gated_slots=8)
    with pytest.raises(ValueError):
        ag.PlayerPopulation(p_sub=-1)
    with pytest.raises(ValueError):
        ag.PricingSpec(delta=0)


# -- sharing and revenue ------------------------------------------------------

def test_subscriber_share_examples():
    assert ag.subscriber_share(1.0, 7, 1) == pytest.approx(1.0)
    assert ag.subscriber_share(0.0, 4, 3) == pytest.approx(1 / 7)
    assert ag.subscriber_share(0.5, 4, 2) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        ag.subscriber_share(0.5, 4, 0)


@given(st.floats(0, 1), st.integers(0, 30), st.integers(1, 30))
def test_subscriber_share_is_a_fraction(beta, p, s):
    assert 0 < ag.subscriber_share(beta, p, s) <= 1 + 1e-12


def test_operator_revenue():
    assert ag.operator_revenue(ag.PricingSpec(chi=1, phi=2, delta=1), 3) == 6
    assert ag.operator_revenue(ag.PricingSpec(chi=1e5, phi=0), 3) == 0
    with pytest.raises(ValueError):
        ag.operator_revenue(ag.PricingSpec(), -1)


@given(st.floats(0, 1e6), st.floats(0, 10), st.floats(0.01, 10), st.integers(0, 20),
       st.floats(0.1, 5))
def test_revenue_linear_in_each_factor(chi, phi, delta, p, scale):
    base = ag.operator_revenue(ag.PricingSpec(chi, phi, delta), p)
    for scaled in (ag.PricingSpec(chi * scale, phi, delta), ag.PricingSpec(chi, phi * scale, delta),
                   ag.PricingSpec(chi, phi, delta * scale)):
        assert ag.operator_revenue(scaled, p) == pytest.approx(base * scale, rel=1e-9, abs=1e-9)


# -- potential, NE ------------------------------------------------------------

def test_toy_game_equilibria():
    game = toy_game()
    assert ag.is_ne(game, (0, 1)) and ag.is_ne(game, (1, 0))
    assert not ag.is_ne(game, (0, 0))  # deviating to the MBS gives 4 > 3
    assert not ag.is_ne(game, (1, 1))
    assert ag.enumerate_ne_bruteforce(game) == {(0, 1), (1, 0)}
    result = ag.find_ne(game)
    assert result.profile in {(0, 1), (1, 0)}
    assert result.p_femto == 1


def test_toy_game_potential_tracks_deviation():
    game = toy_game()
    for profile in itertools.product((0, 1), repeat=2):
        for i in range(2):
            dev = list(profile)
            dev[i] = 1 - dev[i]
            d_phi = ag.potential(game, dev) - ag.potential(game, profile)
            d_u = ag.player_utility(game, dev, i) - ag.player_utility(game, profile, i)
            assert d_phi == pytest.approx(d_u)


def test_potential_edge_cases():
    empty = ag.TabularGame(0, lambda p: 1.0, lambda p: 1.0)
    assert ag.potential(empty, ()) == 0
    assert ag.enumerate_ne_bruteforce(empty) == {()}
    single = ag.TabularGame(1, lambda p: 5.0, lambda p: 2.0)
    assert ag.potential(single, (0,)) - ag.potential(single, (1,)) == pytest.approx(3.0)
    assert ag.is_ne(single, (0,))
    assert ag.find_ne(single).profile == (0,)


def test_dominant_fbs():
    game = ag.TabularGame(5, lambda p: 10.0, lambda p: 1.0)
    assert ag.find_ne(game).profile == (0,) * 5
    assert ag.enumerate_ne_bruteforce(game) == {(0,) * 5}


def test_indifferent_player_keeps_strategy():
    game = ag.TabularGame(3, lambda p: 1.0, lambda p: 1.0)
    assert ag.find_ne(game, (0, 1, 0)).profile == (0, 1, 0)
    assert ag.find_ne(game).iterations == 0


def test_bruteforce_guard():
    with pytest.raises(ValueError, match="find_ne"):
        ag.enumerate_ne_bruteforce(ag.TabularGame(21, lambda p: 1.0, lambda p: 1.0))


def test_find_ne_reports_non_convergence():
    game = ag.TabularGame(10, lambda p: 10.0, lambda p: 1.0)
    with pytest.raises(ag.ConvergenceError) as info:
        ag.find_ne(game, max_steps=3)
    assert ag.count_femto(info.value.profile) == 3
    with pytest.raises(ValueError):
        ag.find_ne(game, max_steps=0)


def test_profile_validation():
    with pytest.raises(ValueError):
        ag.potential(toy_game(), (0,))
    with pytest.raises(ValueError):
        ag.is_ne(toy_game(), (0, 2))


utilities = st.lists(st.floats(-10, 10, allow_nan=False), min_size=13, max_size=13)


@settings(max_examples=200)
@given(st.integers(1, 8), utilities, utilities, st.data())
def test_best_response_matches_bruteforce(p, a, b, data):
    game = ag.TabularGame(p, lambda k: a[k], lambda k: b[k])
    start = tuple(data.draw(st.lists(st.integers(0, 1), min_size=p, max_size=p)))
    result = ag.find_ne(game, start)
    assert ag.is_ne(game, result.profile)
    assert result.profile in ag.enumerate_ne_bruteforce(game)
    assert result.iterations <= 2 ** p
    assert result.potential_value == pytest.approx(ag.potential(game, result.profile))


@settings(max_examples=200)
@given(st.integers(0, 2**31 - 1))
def test_exact_potential_on_scenario_games(seed):
    rng = np.random.default_rng(seed)
    game = random_game(ScenarioConfig(phi=1.0), rng, 10)
    profile = tuple(int(v) for v in rng.integers(0, 2, game.p_players))
    i = int(rng.integers(game.p_players))
    dev = list(profile)
    dev[i] = 1 - dev[i]
    d_phi = ag.potential(game, dev) - ag.potential(game, profile)
    d_u = ag.player_utility(game, dev, i) - ag.player_utility(game, profile, i)
    assert d_phi == pytest.approx(d_u, rel=1e-9, abs=1e-6)


@given(st.integers(1, 8), utilities, utilities, st.data())
def test_anonymity(p, a, b, data):
    game = ag.TabularGame(p, lambda k: a[k], lambda k: b[k])
    profile = data.draw(st.lists(st.integers(0, 1), min_size=p, max_size=p))
    perm = data.draw(st.permutations(range(p)))
    shuffled = [profile[j] for j in perm]
    for i in range(p):
        j = perm.index(i)
        assert ag.player_utility(game, profile, i) == ag.player_utility(game, shuffled, j)


def test_spec_game_solves_and_is_ne():
    spec = spec_with(pricing=ag.PricingSpec(chi=1e5, phi=0.5), gain_fbs_link=1e-7,
                     gain_mbs_link=1e-12)
    result = ag.find_ne(spec)
    assert ag.is_ne(spec, result.profile)
    assert math.isfinite(result.potential_value)

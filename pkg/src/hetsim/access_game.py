"""Femtocell cell-selection game.

Every nonsubscriber that hears the FBS louder than the MBS is a player
choosing between the MBS (strategy 1) and the FBS (strategy 0).  Utilities
depend on a profile only through ``p_femto``, the number of players on the
FBS, so the game is anonymous and admits an exact potential.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

MAX_BRUTEFORCE_PLAYERS = 20
REL_TOL = 1e-12

MBS = 1
FBS = 0


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, profile: tuple[int, ...]):
        super().__init__(message)
        self.profile = profile


class UESet(str, enum.Enum):
    D = "D"
    D_STAR = "D*"


@dataclass(frozen=True)
class PlayerPopulation:
    p_sub: int = 0
    p_non: int = 0
    p_players: int = 0

    def __post_init__(self):
        for name in ("p_sub", "p_non", "p_players"):
            v = getattr(self, name)
            if v < 0 or int(v) != v:
                raise ValueError(f"{name} must be a non-negative integer")


@dataclass(frozen=True)
class PricingSpec:
    chi: float = 0.0
    phi: float = 0.0
    delta: float = 1.0

    def __post_init__(self):
        if self.chi < 0 or self.phi < 0:
            raise ValueError("chi and phi must be non-negative")
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @property
    def price(self) -> float:
        return self.chi * self.phi * self.delta


@dataclass(frozen=True)
class AccessGameSpec:
    """Inputs of the cell-selection game for one FBS.

    ``macro_interference_w`` is the FBS power a macro player still receives
    on its own slots; 0 means macro players see noise only.
    """

    bandwidth_hz: float
    beta: float
    population: PlayerPopulation
    pricing: PricingSpec = field(default_factory=PricingSpec)
    noise_w: float = 1e-13
    tp_max_mbs_w: float = 1500.0
    tp_max_fbs_w: float = 0.015
    gain_fbs_link: float = 1e-7
    gain_mbs_link: float = 1e-10
    delta_thresh_db: float = 5.0
    omega_thresh_db: float = 5.0
    gated_slots: int = 0
    macro_interference_w: float = 0.0

    def __post_init__(self):
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")
        if self.noise_w <= 0:
            raise ValueError("noise_w must be positive")
        if self.gain_fbs_link <= 0 or self.gain_mbs_link <= 0:
            raise ValueError("link gains must be positive")
        if self.tp_max_mbs_w <= 0 or self.tp_max_fbs_w < 0:
            raise ValueError("transmit powers must be positive")
        if self.macro_interference_w < 0:
            raise ValueError("macro_interference_w must be non-negative")
        # MBS-served users never drop below p_non, whatever the profile.
        if not 0 <= self.gated_slots <= self.population.p_non + self.population.p_players:
            raise ValueError("gated_slots must lie in [0, number of MBS-served users]")

    @property
    def p_players(self) -> int:
        return self.population.p_players

    def u0(self, p_femto: int) -> float:
        return utility(self, FBS, p_femto)

    def u1(self, p_femto: int) -> float:
        return utility(self, MBS, p_femto)


class CountGame(Protocol):
    """Anything exposing count-indexed utilities.

    ``u0(p)`` is an FBS player's utility with ``p`` players on the FBS
    (itself included); ``u1(p)`` is an MBS player's utility with ``p``
    players on the FBS.
    """

    @property
    def p_players(self) -> int: ...

    def u0(self, p_femto: int) -> float: ...

    def u1(self, p_femto: int) -> float: ...


@dataclass(frozen=True)
class TabularGame:
    """A count game from two plain callables; handy for toy games and tests."""

    p_players: int
    fbs_utility: Callable[[int], float]
    mbs_utility: Callable[[int], float]

    def u0(self, p_femto: int) -> float:
        return self.fbs_utility(p_femto)

    def u1(self, p_femto: int) -> float:
        return self.mbs_utility(p_femto)


@dataclass(frozen=True)
class NEResult:
    profile: tuple[int, ...]
    iterations: int
    potential_value: float

    @property
    def p_femto(self) -> int:
        return count_femto(self.profile)


def classify_ue(rp_fbs_dbm: float, rp_mbs_dbm: float) -> UESet:
    """D when the FBS is heard strictly louder than the MBS; ties go to D*."""
    return UESet.D if rp_fbs_dbm > rp_mbs_dbm else UESet.D_STAR


def allowed_fbs_power(spec: AccessGameSpec, rp_mbs_at_mue_dbm: float,
                      rp_fbs_at_mue_dbm: float) -> float:
    """FBS power (W) allowed on the slot of a given MUE.

    The FBS may use full power only if the macro signal at the MUE exceeds
    the femto signal by at least both interference margins.
    """
    margin = spec.delta_thresh_db + spec.omega_thresh_db
    if rp_mbs_at_mue_dbm >= rp_fbs_at_mue_dbm + margin:
        return spec.tp_max_fbs_w
    return 0.0


def _check_count(spec, p_femto: int, lo: int, hi: int):
    if not lo <= p_femto <= hi:
        raise ValueError(f"femto count {p_femto} outside [{lo}, {hi}]")


def femto_sinr(spec: AccessGameSpec) -> float:
    return (spec.tp_max_fbs_w * spec.gain_fbs_link) / (
        spec.noise_w + spec.tp_max_mbs_w * spec.gain_mbs_link)


def macro_snr(spec: AccessGameSpec) -> float:
    return (spec.tp_max_mbs_w * spec.gain_mbs_link) / (spec.noise_w + spec.macro_interference_w)


def fbs_capacity(spec: AccessGameSpec, p_femto: int) -> float:
    """FBS cell capacity in bit/s when ``p_femto`` players use the FBS.

    The FBS only transmits on MBS TDMA slots that are not gated.
    """
    pop = spec.population
    _check_count(spec, p_femto, 0, pop.p_players)
    mbs_served = pop.p_non + pop.p_players - p_femto
    if mbs_served == 0:
        return 0.0
    usable = max(mbs_served - spec.gated_slots, 0) / mbs_served
    return usable * spec.bandwidth_hz * math.log2(1.0 + femto_sinr(spec))


def utility(spec: AccessGameSpec, player_choice: int, p_femto_total: int) -> float:
    pop = spec.population
    if player_choice == MBS:
        _check_count(spec, p_femto_total, 0, pop.p_players - 1)
        share = spec.bandwidth_hz / (pop.p_non + pop.p_players - p_femto_total)
        return share * math.log2(1.0 + macro_snr(spec))
    if player_choice == FBS:
        _check_count(spec, p_femto_total, 1, pop.p_players)
        share = (1.0 - spec.beta) / (pop.p_sub + p_femto_total)
        return share * fbs_capacity(spec, p_femto_total) - spec.pricing.price
    raise ValueError(f"player_choice must be 0 (FBS) or 1 (MBS), got {player_choice}")


def subscriber_share(beta: float, p_players: int, p_sub: int) -> float:
    """Fraction of FBS resources each subscriber gets.

    Subscribers split ``beta`` among themselves and then share the
    remaining ``1 - beta`` with the ``p_players`` femto players.
    """
    if p_sub < 1:
        raise ValueError("subscriber share undefined without subscribers")
    return (beta * p_players + p_sub) / (p_sub**2 + p_sub * p_players)


def operator_revenue(pricing: PricingSpec, p_femto: int) -> float:
    if p_femto < 0:
        raise ValueError("p_femto must be non-negative")
    return p_femto * pricing.price


def count_femto(profile: Sequence[int]) -> int:
    return sum(1 for s in profile if s == FBS)


def _validate_profile(game: CountGame, profile: Sequence[int]) -> tuple[int, ...]:
    profile = tuple(int(s) for s in profile)
    if len(profile) != game.p_players:
        raise ValueError(f"profile length {len(profile)} != {game.p_players} players")
    if any(s not in (FBS, MBS) for s in profile):
        raise ValueError("profile entries must be 0 (FBS) or 1 (MBS)")
    return profile


def player_utility(game: CountGame, profile: Sequence[int], i: int) -> float:
    k = count_femto(profile)
    return game.u0(k) if profile[i] == FBS else game.u1(k)


def improves(new: float, old: float) -> bool:
    """Strict improvement up to a relative tolerance."""
    return new - old > REL_TOL * max(abs(new), abs(old))


def potential(game: CountGame, profile: Sequence[int]) -> float:
    profile = _validate_profile(game, profile)
    k = count_femto(profile)
    return (sum(game.u0(n) for n in range(1, k + 1))
            + sum(game.u1(n) for n in range(k, game.p_players)))


def is_ne(game: CountGame, profile: Sequence[int]) -> bool:
    profile = _validate_profile(game, profile)
    k = count_femto(profile)
    if k > 0 and improves(game.u1(k - 1), game.u0(k)):
        return False
    if k < game.p_players and improves(game.u0(k + 1), game.u1(k)):
        return False
    return True


def find_ne(game: CountGame, initial_profile: Sequence[int] | None = None,
            max_steps: int = 10_000) -> NEResult:
    """Round-robin best-response dynamics.

    Players are visited in index order; an indifferent player keeps its
    strategy.  ``iterations`` counts strategy switches.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if initial_profile is None:
        initial_profile = (MBS,) * game.p_players
    profile = list(_validate_profile(game, initial_profile))
    k = count_femto(profile)
    steps = 0
    changed = True
    while changed:
        changed = False
        for i, s in enumerate(profile):
            if s == FBS:
                switch = improves(game.u1(k - 1), game.u0(k))
            else:
                switch = improves(game.u0(k + 1), game.u1(k))
            if not switch:
                continue
            if steps >= max_steps:
                raise ConvergenceError(
                    f"best response did not converge in {max_steps} steps", tuple(profile))
            profile[i] = 1 - s
            k += -1 if s == FBS else 1
            steps += 1
            changed = True
    result = tuple(profile)
    return NEResult(result, steps, potential(game, result))


def enumerate_ne_bruteforce(game: CountGame) -> set[tuple[int, ...]]:
    """Every pure NE, found by testing each player's deviation in each profile."""
    n = game.p_players
    if n > MAX_BRUTEFORCE_PLAYERS:
        raise ValueError(
            f"{n} players means 2^{n} profiles; brute force is limited to "
            f"{MAX_BRUTEFORCE_PLAYERS} players, use find_ne instead")
    u0 = {p: game.u0(p) for p in range(1, n + 1)}
    u1 = {p: game.u1(p) for p in range(0, n)}
    found = set()
    for profile in itertools.product((FBS, MBS), repeat=n):
        k = profile.count(FBS)
        stable = True
        for s in profile:
            if s == FBS:
                current, deviation = u0[k], u1[k - 1]
            else:
                current, deviation = u1[k], u0[k + 1]
            if improves(deviation, current):
                stable = False
                break
        if stable:
            found.add(profile)
    return found

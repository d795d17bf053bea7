"""Per-band downlink SINR for the macro, femto and optical-femto tiers, and
Rayleigh outage probability."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np


class Tier(str, enum.Enum):
    FUE = "FUE"
    MUE = "MUE"
    OFUE = "OFUE"


class TxClass(str, enum.Enum):
    MBS = "MBS"
    FAP = "FAP"
    OFAP = "OFAP"


class LinkCategory(enum.IntEnum):
    """The nine transmitter-class / receiver-tier pairs."""

    MBS_MUE = 1
    FAP_MUE = 2
    OFAP_MUE = 3
    FAP_FUE = 4
    MBS_FUE = 5
    OFAP_FUE = 6
    OFAP_OFUE = 7
    MBS_OFUE = 8
    FAP_OFUE = 9


_LINKS = {
    (TxClass.MBS, Tier.MUE): LinkCategory.MBS_MUE,
    (TxClass.FAP, Tier.MUE): LinkCategory.FAP_MUE,
    (TxClass.OFAP, Tier.MUE): LinkCategory.OFAP_MUE,
    (TxClass.FAP, Tier.FUE): LinkCategory.FAP_FUE,
    (TxClass.MBS, Tier.FUE): LinkCategory.MBS_FUE,
    (TxClass.OFAP, Tier.FUE): LinkCategory.OFAP_FUE,
    (TxClass.OFAP, Tier.OFUE): LinkCategory.OFAP_OFUE,
    (TxClass.MBS, Tier.OFUE): LinkCategory.MBS_OFUE,
    (TxClass.FAP, Tier.OFUE): LinkCategory.FAP_OFUE,
}

SERVING_CLASS = {Tier.MUE: TxClass.MBS, Tier.FUE: TxClass.FAP, Tier.OFUE: TxClass.OFAP}


def link_category(tx_class: TxClass, tier: Tier) -> LinkCategory:
    return _LINKS[(TxClass(tx_class), Tier(tier))]


class MissingRealizationError(KeyError):
    pass


@dataclass
class ChannelRealizationVector:
    """Complex gains keyed by (category, transmitter, receiver, band)."""

    gains: dict = field(default_factory=dict)

    def __getitem__(self, key) -> complex:
        try:
            return self.gains[key]
        except KeyError:
            raise MissingRealizationError(f"no channel realization for {key}") from None

    def __setitem__(self, key, value: complex):
        if not np.isfinite(value):
            raise ValueError(f"gain for {key} is not finite")
        self.gains[key] = complex(value)

    def category(self, cat: LinkCategory) -> dict:
        return {k: v for k, v in self.gains.items() if k[0] == cat}


@dataclass(frozen=True)
class Topology:
    """Transmitter ids per class and receiver ids per tier."""

    mbs: tuple = ()
    fap: tuple = ()
    ofap: tuple = ()
    mue: tuple = ()
    fue: tuple = ()
    ofue: tuple = ()

    @classmethod
    def from_counts(cls, n_mbs=0, n_fap=0, n_ofap=0, n_mue=0, n_fue=0, n_ofue=0) -> Topology:
        if min(n_mbs, n_fap, n_ofap, n_mue, n_fue, n_ofue) < 0:
            raise ValueError("counts must be non-negative")
        return cls(*(tuple(range(n)) for n in (n_mbs, n_fap, n_ofap, n_mue, n_fue, n_ofue)))

    def transmitters(self, tx_class: TxClass) -> tuple:
        return {TxClass.MBS: self.mbs, TxClass.FAP: self.fap, TxClass.OFAP: self.ofap}[tx_class]

    def receivers(self, tier: Tier) -> tuple:
        return {Tier.MUE: self.mue, Tier.FUE: self.fue, Tier.OFUE: self.ofue}[tier]


@dataclass
class PowerAllocation:
    """Per-transmitter N-band power vectors in watts."""

    powers: dict = field(default_factory=dict)  # (TxClass, tx id) -> ndarray
    max_power_w: dict = field(default_factory=dict)  # TxClass -> float

    def set(self, tx_class: TxClass, tx_id: Hashable, vector):
        vec = np.asarray(vector, dtype=float)
        if np.any(vec < 0):
            raise ValueError("band powers must be non-negative")
        cap = self.max_power_w.get(TxClass(tx_class))
        if cap is not None and np.any(vec > cap):
            raise ValueError(f"{tx_class} {tx_id} exceeds its maximum power {cap} W")
        self.powers[(TxClass(tx_class), tx_id)] = vec

    def power(self, tx_class: TxClass, tx_id: Hashable, band: int) -> float:
        vec = self.powers.get((TxClass(tx_class), tx_id))
        return 0.0 if vec is None else float(vec[band])

    def transmitters(self, tx_class: TxClass) -> list:
        return [tid for (cls, tid) in self.powers if cls is TxClass(tx_class)]


@dataclass(frozen=True)
class NoiseAndThreshold:
    sigma2_fue: float
    sigma2_mue: float
    sigma2_ofue: float
    varpi: float

    def __post_init__(self):
        if min(self.sigma2_fue, self.sigma2_mue, self.sigma2_ofue) <= 0:
            raise ValueError("noise powers must be positive")
        if self.varpi <= 0:
            raise ValueError("varpi must be positive")

    def noise(self, tier: Tier) -> float:
        return {Tier.FUE: self.sigma2_fue, Tier.MUE: self.sigma2_mue,
                Tier.OFUE: self.sigma2_ofue}[Tier(tier)]


def draw_realizations(topology: Topology, bands: int, rng: np.random.Generator,
                      scale: float | Mapping = 1.0) -> ChannelRealizationVector:
    """Draw i.i.d. circularly-symmetric complex normal gains.

    ``scale`` is the mean of ``|gain|**2``; a mapping keyed by
    (category, tx, rx) gives per-link means (missing links default to 1).
    Draw order is fixed so a seeded generator gives identical vectors.
    """
    if bands < 1:
        raise ValueError("bands must be >= 1")
    if not isinstance(scale, Mapping) and scale <= 0:
        raise ValueError("fading scale must be positive")
    out = ChannelRealizationVector()
    for (tx_class, tier), cat in sorted(_LINKS.items(), key=lambda kv: kv[1]):
        for tx in topology.transmitters(tx_class):
            for rx in topology.receivers(tier):
                mean = scale.get((cat, tx, rx), 1.0) if isinstance(scale, Mapping) else scale
                z = rng.normal(size=(bands, 2)) * math.sqrt(mean / 2.0)
                for n in range(bands):
                    out.gains[(cat, tx, rx, n)] = complex(z[n, 0], z[n, 1])
    return out


def received(allocations: PowerAllocation, realizations: ChannelRealizationVector,
             tx_class: TxClass, tx_id, tier: Tier, rx_id, band: int) -> float:
    p = allocations.power(tx_class, tx_id, band)
    if p == 0.0:
        return 0.0
    g = realizations[(link_category(tx_class, tier), tx_id, rx_id, band)]
    return p * abs(g) ** 2


def sinr(tier: Tier, receiver, server, band: int, realizations: ChannelRealizationVector,
         allocations: PowerAllocation, noise: NoiseAndThreshold) -> float:
    """Linear SINR of ``receiver`` (of ``tier``) served by ``server`` on ``band``.

    Interference from every other active transmitter, in all three classes,
    is summed in the denominator.
    """
    tier = Tier(tier)
    own = SERVING_CLASS[tier]
    signal = received(allocations, realizations, own, server, tier, receiver, band)
    if signal == 0.0:
        return 0.0
    interference = 0.0
    for tx_class in TxClass:
        for tx in allocations.transmitters(tx_class):
            if tx_class is own and tx == server:
                continue
            interference += received(allocations, realizations, tx_class, tx, tier, receiver, band)
    return signal / (noise.noise(tier) + interference)


def outage_probability(sinr_linear: float, varpi: float) -> float:
    """Probability that a Rayleigh-faded link with mean SINR ``sinr_linear``
    drops below ``varpi``."""
    if not (sinr_linear > 0 and varpi > 0):
        raise ValueError("sinr and varpi must be positive")
    return -math.expm1(-varpi / sinr_linear)


def empirical_outage(mean_sinr: float, varpi: float, trials: int,
                     rng: np.random.Generator) -> float:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    draws = mean_sinr * rng.exponential(1.0, size=trials)
    return float(np.count_nonzero(draws < varpi)) / trials

"""Voice/data channel pools with cross-borrowing and lighting control.

The FBS owns the voice channels, the optical access point owns the data
channels.  When a pool is full, a request may take a free channel of the
other pool.  Users admitted within their own kind's quota are primary and
can never be displaced; users admitted beyond it are secondary.  The
lighting of the optical access point is on exactly when a data user is
being served.
"""

from __future__ import annotations

import copy
import csv
import enum
from dataclasses import dataclass, field
from typing import Hashable, Iterable, TextIO


class Kind(str, enum.Enum):
    VOICE = "voice"
    DATA = "data"


class Outcome(str, enum.Enum):
    SERVED_NATIVE = "served_native"
    SERVED_BORROWED = "served_borrowed"
    REJECTED = "rejected"


class PoolStateError(RuntimeError):
    """Pool counters violate an invariant."""


@dataclass(frozen=True)
class AllocationRequest:
    kind: Kind
    user_id: Hashable

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))


@dataclass
class ChannelPool:
    voice_total: int
    data_total: int
    allow_borrowing: bool = True
    preemptive: bool = True
    voice_used: int = 0
    data_used: int = 0
    voice_borrowed_by_data: int = 0
    data_borrowed_by_voice: int = 0
    lighting_on: bool = False
    rejected: int = 0
    preempted: int = 0
    # user id -> (kind, pool whose channel the user holds, primary flag)
    holders: dict = field(default_factory=dict)

    def __post_init__(self):
        self.check()

    def check(self):
        counts = (self.voice_total, self.data_total, self.voice_used, self.data_used,
                  self.voice_borrowed_by_data, self.data_borrowed_by_voice)
        if any(c < 0 for c in counts):
            raise PoolStateError("channel counts must be non-negative")
        if self.voice_used + self.voice_borrowed_by_data > self.voice_total:
            raise PoolStateError("voice pool over-allocated")
        if self.data_used + self.data_borrowed_by_voice > self.data_total:
            raise PoolStateError("data pool over-allocated")
        if self.lighting_on != (self.data_users > 0):
            raise PoolStateError("lighting must be on exactly when data users are served")

    @property
    def voice_free(self) -> int:
        return self.voice_total - self.voice_used - self.voice_borrowed_by_data

    @property
    def data_free(self) -> int:
        return self.data_total - self.data_used - self.data_borrowed_by_voice

    @property
    def data_users(self) -> int:
        return self.data_used + self.voice_borrowed_by_data

    @property
    def served(self) -> int:
        return (self.voice_used + self.data_used
                + self.voice_borrowed_by_data + self.data_borrowed_by_voice)

    @property
    def borrows(self) -> int:
        return self.voice_borrowed_by_data + self.data_borrowed_by_voice

    def counters(self) -> tuple:
        return (self.voice_total, self.data_total, self.voice_used, self.data_used,
                self.voice_borrowed_by_data, self.data_borrowed_by_voice, self.lighting_on)

    def _relight(self):
        self.lighting_on = self.data_users > 0

    def _primaries(self, kind: Kind) -> int:
        return sum(1 for k, _, primary in self.holders.values() if k is kind and primary)

    def _quota(self, kind: Kind) -> int:
        return self.voice_total if kind is Kind.VOICE else self.data_total

    def _take(self, kind: Kind) -> tuple[Kind | None, Outcome]:
        other = Kind.DATA if kind is Kind.VOICE else Kind.VOICE
        if self._free(kind) > 0:
            self._occupy(kind, kind, +1)
            return kind, Outcome.SERVED_NATIVE
        if self.allow_borrowing and self._free(other) > 0:
            self._occupy(kind, other, +1)
            return other, Outcome.SERVED_BORROWED
        return None, Outcome.REJECTED

    def _free(self, pool: Kind) -> int:
        return self.voice_free if pool is Kind.VOICE else self.data_free

    def _occupy(self, kind: Kind, pool: Kind, n: int):
        if kind is pool:
            if kind is Kind.VOICE:
                self.voice_used += n
            else:
                self.data_used += n
        elif kind is Kind.VOICE:
            self.data_borrowed_by_voice += n
        else:
            self.voice_borrowed_by_data += n

    def request(self, req: AllocationRequest) -> AllocationDecision:
        """Admit one user.

        A user arriving while fewer than ``quota`` users of its kind hold
        primary status becomes primary; anyone else is secondary and only
        rides on spare capacity.  A primary arriving at a full pool
        preempts the most recent secondary user.  A repeated request from
        a served secondary re-checks its priority and keeps its channel.
        """
        self.check()
        held = self.holders.get(req.user_id)
        if held is not None:
            kind, slot, primary = held
            if kind is not req.kind:
                raise ValueError(f"user {req.user_id!r} is already served as {kind.value}")
            if not primary and self._primaries(kind) < self._quota(kind):
                self.holders[req.user_id] = (kind, slot, True)
            outcome = Outcome.SERVED_NATIVE if slot is kind else Outcome.SERVED_BORROWED
            return AllocationDecision(outcome, self.snapshot())
        primary = self._primaries(req.kind) < self._quota(req.kind)
        if self.preemptive and primary and self.voice_free == 0 and self.data_free == 0:
            victims = [u for u, (_, _, p) in self.holders.items() if not p]
            if victims:
                self.release(victims[-1])
                self.preempted += 1
        slot, outcome = self._take(req.kind)
        if slot is None:
            self.rejected += 1
        else:
            self.holders[req.user_id] = (req.kind, slot, primary)
        self._relight()
        return AllocationDecision(outcome, self.snapshot())

    def release(self, user_id) -> ChannelPool:
        try:
            kind, slot, _ = self.holders.pop(user_id)
        except KeyError:
            raise KeyError(f"user {user_id!r} is not served") from None
        self._occupy(kind, slot, -1)
        self._relight()
        return self

    def rebalance(self) -> ChannelPool:
        """Move borrowers back to their own pool while it has room.

        One move can free room for a borrower of the other kind, so passes
        repeat until nothing moves.
        """
        moved = True
        while moved:
            moved = False
            for uid, (kind, slot, primary) in list(self.holders.items()):
                if kind is slot or self._free(kind) == 0:
                    continue
                self._occupy(kind, slot, -1)
                self._occupy(kind, kind, +1)
                self.holders[uid] = (kind, kind, primary)
                moved = True
        return self

    def utilization(self) -> float:
        total = self.voice_total + self.data_total
        if total <= 0:
            raise ValueError("pool has no channels")
        return self.served / total

    def snapshot(self) -> ChannelPool:
        return copy.deepcopy(self)


@dataclass(frozen=True)
class AllocationDecision:
    outcome: Outcome
    pool: ChannelPool


def request(pool: ChannelPool, req: AllocationRequest) -> AllocationDecision:
    return pool.request(req)


def release(pool: ChannelPool, user_id) -> ChannelPool:
    return pool.release(user_id)


def rebalance(pool: ChannelPool) -> ChannelPool:
    return pool.rebalance()


def utilization(pool: ChannelPool) -> float:
    return pool.utilization()


TRACE_HEADER = ["event", "kind", "outcome", "voice_used", "data_used", "borrows",
                "lighting", "utilization"]


@dataclass(frozen=True)
class Event:
    """``request`` a channel of ``kind`` for ``user_id``, or ``release`` it."""

    action: str
    user_id: str
    kind: Kind | None = None


def replay(pool: ChannelPool, events: Iterable[Event], auto_rebalance: bool = True):
    """Apply events in order and yield one trace row per event.

    Releasing a user that is not currently served (e.g. one that was
    rejected) is a no-op.
    """
    for i, ev in enumerate(events):
        if ev.action == "request":
            outcome = pool.request(AllocationRequest(ev.kind, ev.user_id)).outcome.value
            kind = Kind(ev.kind).value
        elif ev.action == "release":
            held = pool.holders.get(ev.user_id)
            if held is None:
                outcome, kind = "ignored", ""
            else:
                pool.release(ev.user_id)
                outcome, kind = "released", held[0].value
        else:
            raise ValueError(f"unknown action {ev.action!r}")
        if auto_rebalance:
            pool.rebalance()
        yield {
            "event": i,
            "kind": kind,
            "outcome": outcome,
            "voice_used": pool.voice_used,
            "data_used": pool.data_used,
            "borrows": pool.borrows,
            "lighting": int(pool.lighting_on),
            "utilization": pool.utilization(),
        }


def read_events(fh: TextIO) -> list[Event]:
    """Parse an events file: one ``request <user> <voice|data>`` or
    ``release <user>`` per line, ``#`` comments allowed."""
    events = []
    for lineno, raw in enumerate(fh, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "request" and len(parts) == 3:
            try:
                kind = Kind(parts[2])
            except ValueError:
                raise ValueError(f"line {lineno}: unknown kind {parts[2]!r}") from None
            events.append(Event("request", parts[1], kind))
        elif parts[0] == "release" and len(parts) == 2:
            events.append(Event("release", parts[1]))
        else:
            raise ValueError(f"line {lineno}: cannot parse {line!r}")
    return events


def write_trace(rows, fh: TextIO):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for r in rows:
        writer.writerow([r["event"], r["kind"], r["outcome"], r["voice_used"], r["data_used"],
                         r["borrows"], r["lighting"], f"{r['utilization']:.6g}"])

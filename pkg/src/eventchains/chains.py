"""Event and chain data model.

An event is one transmission burst on the channel: a success (exactly
one transmitter) or a failure (two or more simultaneous transmitters).
Its start is the CCA instant of the transmitter(s); its finish is the
first later instant at which a new event could begin.  A chain is an
ordered event sequence carrying its aggregate probability and the
average energy spent by the whole network while it unfolds.
"""

from __future__ import annotations

from dataclasses import dataclass

from .params import DerivedModel

SUCCESS = "S"
FAILURE = "F"


@dataclass(frozen=True)
class Event:
    kind: str  # SUCCESS or FAILURE
    start: int  # symbols
    finish: int  # symbols, on the slot grid

    def __post_init__(self):
        if self.kind not in (SUCCESS, FAILURE):
            raise ValueError(f"event kind must be 'S' or 'F', got {self.kind!r}")
        if self.finish <= self.start:
            raise ValueError("event finish must exceed its start")


def make_event(model: DerivedModel, kind: str, start: int) -> Event:
    """Build an event starting at `start` symbols (slot-aligned).

    Success occupies CCA+TAT+TX+TAT+ACK, failure CCA+TAT+TX; both round
    up to the next slot boundary, which is where the next CCA could land.
    """
    d_bp = model.timing.d_bp
    if start < 0 or start % d_bp != 0:
        raise ValueError(f"event start {start} is not on the {d_bp}-symbol slot grid")
    length = model.event_len_slots(kind)
    return Event(kind, start, start + length * d_bp)


@dataclass(frozen=True)
class Chain:
    """Finalized outcome: event sequence, probability, energy, success count."""

    events: tuple  # tuple[Event, ...] ordered by start
    prob: float
    energy: float = 0.0

    @property
    def n_success(self):
        return sum(1 for e in self.events if e.kind == SUCCESS)

    def signature(self):
        """Hashable (kind, start) sequence for cross-oracle comparison."""
        return tuple((e.kind, e.start) for e in self.events)

    def to_line(self) -> str:
        """Debug-dump form: one chain per line."""
        seq = " ".join(f"{e.kind}@{e.start}" for e in self.events)
        return f"p={self.prob!r} [{seq}]"


def chain_from_slots(model: DerivedModel, slot_events, prob: float, energy: float = 0.0) -> Chain:
    """Build a public Chain from internal (kind, start_slot) pairs."""
    evs = tuple(make_event(model, k, s * model.timing.d_bp) for k, s in slot_events)
    return Chain(evs, prob, energy)


@dataclass(frozen=True)
class NodeComposition:
    """Split of the residual nodes after a chain's last event.

    n_p participated in the last event and are still active, n_np are
    active non-participants, n_d have dropped their packet.
    """

    n_p: int
    n_np: int
    n_d: int

    def total(self):
        return self.n_p + self.n_np + self.n_d

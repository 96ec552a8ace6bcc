"""Reference semantics of publish-subscribe ports, used as the system under learning.

The concrete layer (:func:`port_step`) is a pure function over
:class:`PortState`. A call reports the tuple of *completion events* it
causes: which blocked or fresh calls return during the step. Messages carry
sequence tags so tests can check ordering and loss, but the learner never
sees them.

The harness then maps each event tuple to a single learner symbol through a
named observation map. The map is part of the harness configuration and is
versioned with :data:`HARNESS_VERSION`.

Threads: one writer, one reader and (with the ``interrupt`` extension) one
thread calling ``intr`` on the write side. A thread that is blocked cannot
issue another call; the harness answers such inputs with ``refused``. The
same answer is given to a write that would push a strict buffer past its
capacity bound, since the harness never sends more than N pending packets.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Callable, Dict, FrozenSet, Iterable, Optional, Tuple

from .automata import DISABLED, QUIESCENCE, MealyMachine
from .errors import AlphabetError, ConstructionError, SessionStateError

HARNESS_VERSION = 1

STANDARD = "standard"
NONSTRICT = "buffered_nonstrict"
STRICT = "buffered_strict"
VARIANTS = (STANDARD, NONSTRICT, STRICT)

NONBLOCKING_READ = "nonblocking_read"
INTERRUPT = "interrupt"
EXTENSIONS = (NONBLOCKING_READ, INTERRUPT)

WRITE, READ, READ_NB, INTR = "write", "read", "read_nb", "intr"
WOK, ROK, NODATA, INTR_DONE = "wok", "rok", "nodata", "intr_done"
REFUSED = "refused"

Events = Tuple[str, ...]


@dataclass(frozen=True)
class PortKind:
    variant: str = STANDARD
    capacity: Optional[int] = None
    extensions: FrozenSet[str] = frozenset()
    # "actual" reproduces the observed interrupt behaviour, "expected" the documented one
    interrupt_mode: str = "actual"

    def __post_init__(self):
        object.__setattr__(self, "extensions", frozenset(self.extensions))
        if self.variant not in VARIANTS:
            raise ConstructionError(f"unknown port variant {self.variant!r}")
        if self.variant == STRICT:
            if self.capacity is None or self.capacity < 1:
                raise ConstructionError("a strict buffered port needs capacity >= 1")
        elif self.capacity is not None:
            if self.variant == STANDARD or self.capacity < 1:
                raise ConstructionError(f"capacity {self.capacity} invalid for {self.variant}")
        unknown = self.extensions - set(EXTENSIONS)
        if unknown:
            raise ConstructionError(f"unknown extensions {sorted(unknown)}")
        if NONBLOCKING_READ in self.extensions and self.variant == STANDARD:
            raise ConstructionError("non-blocking read exists on buffered ports only")
        if self.interrupt_mode not in ("actual", "expected"):
            raise ConstructionError(f"unknown interrupt mode {self.interrupt_mode!r}")

    @property
    def inputs(self) -> Tuple[str, ...]:
        ins = [WRITE, READ]
        if NONBLOCKING_READ in self.extensions:
            ins.append(READ_NB)
        if INTERRUPT in self.extensions:
            ins.append(INTR)
        return tuple(ins)

    @property
    def limit(self) -> Optional[int]:
        """Buffer bound: N for strict ports, 1 for non-strict, none for standard."""
        if self.variant == STRICT:
            return self.capacity
        return 1 if self.variant == NONSTRICT else None


@dataclass(frozen=True)
class PortState:
    buffer: Tuple[int, ...] = ()
    reader_blocked: bool = False
    # tag of the message held by a blocked writer
    writer_pending: Optional[int] = None
    interrupted: bool = False
    intr_blocked: bool = False

    @property
    def writer_blocked(self) -> bool:
        return self.writer_pending is not None


def port_step(
    kind: PortKind, s: PortState, symbol: str, tag: int = 0
) -> Tuple[Events, Optional[int], PortState]:
    """One call on the port. Returns (events, delivered tag, next state).

    ``tag`` labels the message carried by a ``write``.
    """
    if symbol not in kind.inputs:
        raise AlphabetError(f"{symbol!r} is not an input of {kind.variant}")
    if symbol == WRITE:
        if s.writer_blocked:
            return (REFUSED,), None, s
        if s.interrupted:
            return (WOK,), None, s
        if s.reader_blocked:
            return (ROK, WOK), tag, replace(s, reader_blocked=False)
        if kind.variant == STANDARD:
            return (), None, replace(s, writer_pending=tag)
        if kind.variant == NONSTRICT:
            return (WOK,), None, replace(s, buffer=(tag,))
        if len(s.buffer) >= kind.capacity:
            return (REFUSED,), None, s
        return (WOK,), None, replace(s, buffer=s.buffer + (tag,))

    if symbol in (READ, READ_NB):
        if s.reader_blocked:
            return (REFUSED,), None, s
        if s.buffer:
            return (ROK,), s.buffer[0], replace(s, buffer=s.buffer[1:])
        if s.writer_blocked:
            got = s.writer_pending
            if s.intr_blocked:
                nxt = replace(s, writer_pending=None, intr_blocked=False, interrupted=True)
                return (INTR_DONE, ROK, WOK), got, nxt
            return (ROK, WOK), got, replace(s, writer_pending=None)
        if symbol == READ_NB:
            return (NODATA,), None, s
        return (), None, replace(s, reader_blocked=True)

    # intr
    if s.intr_blocked:
        return (REFUSED,), None, s
    if s.writer_blocked and not s.interrupted:
        if kind.interrupt_mode == "actual":
            return (), None, replace(s, intr_blocked=True)
        return (INTR_DONE, WOK), None, replace(s, writer_pending=None, interrupted=True)
    return (INTR_DONE,), None, replace(s, interrupted=True)


def _delivery(events: Events) -> str:
    if REFUSED in events:
        return DISABLED
    return ROK if ROK in events else QUIESCENCE


def _delivery_nodata(events: Events) -> str:
    if NODATA in events:
        return NODATA
    return _delivery(events)


def _all_events(events: Events) -> str:
    if REFUSED in events:
        return DISABLED
    return "+".join(sorted(events)) if events else QUIESCENCE


# Observation maps from event tuples to learner output symbols.
#   delivery        - only data handed to the reader is observed
#   delivery-nodata - as delivery, plus the empty answer of a non-blocking read
#   events          - every completion event, fused into one composite symbol
OBSERVATIONS: Dict[str, Callable[[Events], str]] = {
    "delivery": _delivery,
    "delivery-nodata": _delivery_nodata,
    "events": _all_events,
}


def _observation(name: str) -> Callable[[Events], str]:
    try:
        return OBSERVATIONS[name]
    except KeyError:
        raise ConstructionError(f"unknown observation map {name!r}") from None


def reference_mealy(kind: PortKind, observation: str = "delivery") -> MealyMachine:
    """The exact Mealy machine a session of ``kind`` implements (not minimized)."""
    observe = _observation(observation)
    start = PortState()
    index = {start: 0}
    queue = deque([start])
    delta = {}
    while queue:
        s = queue.popleft()
        for i in kind.inputs:
            events, _, t = port_step(kind, s, i)
            if t not in index:
                index[t] = len(index)
                queue.append(t)
            delta[(index[s], i)] = (observe(events), index[t])
    return MealyMachine(kind.inputs, len(index), 0, delta)


class PortSession:
    """A resettable port seen through an observation map."""

    def __init__(self, kind: PortKind, observation: str = "delivery"):
        self.kind = kind
        self.observation = observation
        self._observe = _observation(observation)
        self.inputs = kind.inputs
        self.outputs = reference_mealy(kind, observation).outputs
        self.state: Optional[PortState] = None
        self.resets = 0
        self._next_tag = 0
        self.delivered: list = []

    def reset(self) -> None:
        self.state = PortState()
        self.resets += 1
        self._next_tag = 0
        self.delivered = []

    def step_events(self, symbol: str) -> Events:
        if self.state is None:
            raise SessionStateError("step before reset")
        tag = self._next_tag
        events, got, self.state = port_step(self.kind, self.state, symbol, tag)
        if symbol == WRITE and REFUSED not in events:
            self._next_tag += 1
        if got is not None:
            self.delivered.append(got)
        return events

    def step(self, symbol: str) -> str:
        return self._observe(self.step_events(symbol))


def make_port(
    variant: str = STANDARD,
    capacity: Optional[int] = None,
    extensions: Iterable[str] = (),
    observation: str = "delivery",
    interrupt_mode: str = "actual",
) -> PortSession:
    kind = PortKind(variant, capacity, frozenset(extensions), interrupt_mode)
    return PortSession(kind, observation)

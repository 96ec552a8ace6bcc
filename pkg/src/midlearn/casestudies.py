"""Process networks for the two producer/consumer case studies and the interrupt model.

Program automata are hand translations of the pseudo-code: loop counters are
unrolled into control states. Each channel is an instance of a port model
(learned from the simulator by default) whose actions are prefixed with the
channel name, e.g. ``q1_write``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Tuple

from .automata import ActionSignature, InterfaceAutomaton, minimize_ia, minimize_mealy, mealy_to_ia
from .errors import ConstructionError
from .learner import learn_ia
from .mcheck import Process, ProcessNetwork
from .middleware import (
    INTERRUPT, NONBLOCKING_READ, NONSTRICT, READ_NB, STANDARD, STRICT, WRITE,
    PortKind, make_port, reference_mealy,
)
from .teacher import EqConfig, Teacher

# (label, variant, N, expected conclusion); N is both burst length and capacity
CASE1_TABLE = [
    ("Buffered Port (non-strict)", NONSTRICT, 6, "deadlock"),
    ("Buffered Port (strict, N=1)", STRICT, 1, "OK"),
    ("Buffered Port (strict, N=6)", STRICT, 6, "OK"),
]

# (N1, N2, N3, size, non-blocking first read, expected conclusion)
CASE2_TABLE = [
    (100, 100, 100, 1, False, "OK"),
    (90, 100, 100, 1, False, "deadlock"),
    (100, 100, 100, 6, False, "OK"),
    (90, 100, 100, 6, False, "deadlock"),
    (200, 200, 200, 6, False, "OK"),
    (180, 200, 200, 6, False, "deadlock"),
    (90, 100, 100, 6, True, "OK"),
]


@lru_cache(maxsize=None)
def learned_port(kind: PortKind, observation: str = "delivery") -> InterfaceAutomaton:
    """Identify the port model by learning against the simulator."""
    ia, _ = learn_ia(Teacher(make_port(kind.variant, kind.capacity, kind.extensions,
                                       observation, kind.interrupt_mode), EqConfig()))
    return ia


def reference_port(kind: PortKind, observation: str = "delivery") -> InterfaceAutomaton:
    """The port model derived directly from the simulator's semantics."""
    return mealy_to_ia(minimize_mealy(reference_mealy(kind, observation)))


def restrict_inputs(ia: InterfaceAutomaton, keep: Iterable[str]) -> InterfaceAutomaton:
    """Drop input transitions outside ``keep``: the client never issues those calls."""
    keep = frozenset(keep)
    unknown = keep - ia.signature.inputs
    if unknown:
        raise ConstructionError(f"cannot keep unknown inputs {sorted(unknown)}")
    trans = {(q, a, t) for q, a, t in ia.transitions if a in keep or a in ia.signature.outputs}
    sig = ActionSignature(keep, ia.signature.outputs)
    return minimize_ia(InterfaceAutomaton(sig, ia.states, ia.initial, trans, ia.names))


class _Program:
    """Tiny builder for hand-written program automata."""

    def __init__(self, inputs: Iterable[str], outputs: Iterable[str]):
        self.sig = ActionSignature(inputs, outputs)
        self.names: Dict[int, str] = {}
        self.trans: List[Tuple[int, str, int]] = []

    def state(self, name: str) -> int:
        q = len(self.names)
        self.names[q] = name
        return q

    def add(self, q: int, action: str, t: int) -> None:
        self.trans.append((q, action, t))

    def build(self) -> InterfaceAutomaton:
        return InterfaceAutomaton(self.sig, self.names, 0, self.trans, self.names)


def _channel(name: str, model: InterfaceAutomaton) -> Process:
    rename = {a: f"{name}_{a}" for a in model.signature.actions}
    return Process(name.upper(), model, rename, terminal=model.states)


@dataclass(frozen=True)
class Case1Params:
    n: int = 6
    variant: str = STRICT
    capacity: Optional[int] = None
    port_model: Optional[InterfaceAutomaton] = None
    ack_model: Optional[InterfaceAutomaton] = None

    def __post_init__(self):
        if self.n < 1:
            raise ConstructionError("N must be at least 1")

    def channel_model(self) -> InterfaceAutomaton:
        if self.port_model is not None:
            return self.port_model
        cap = self.capacity if self.capacity is not None else self.n
        kind = PortKind(self.variant, cap if self.variant == STRICT else None)
        return learned_port(kind)


def planner(n: int) -> InterfaceAutomaton:
    p = _Program(inputs=["q2_rok"], outputs=["q1_write", "q2_read"])
    writes = [p.state(f"write{i + 1}") for i in range(n)]
    ask = p.state("read_ack")
    wait = p.state("wait_ack")
    for i, q in enumerate(writes):
        p.add(q, "q1_write", writes[i + 1] if i + 1 < n else ask)
    p.add(ask, "q2_read", wait)
    p.add(wait, "q2_rok", writes[0])
    return p.build()


def controller(n: int) -> InterfaceAutomaton:
    p = _Program(inputs=["q1_rok"], outputs=["q1_read", "q2_write"])
    reads = [p.state(f"read{i + 1}") for i in range(n)]
    waits = [p.state(f"wait{i + 1}") for i in range(n)]
    ack = p.state("write_ack")
    for i in range(n):
        p.add(reads[i], "q1_read", waits[i])
        p.add(waits[i], "q1_rok", reads[i + 1] if i + 1 < n else ack)
    p.add(ack, "q2_write", reads[0])
    return p.build()


def build_case1(p: Case1Params) -> ProcessNetwork:
    """Planner and Controller exchanging N messages and an acknowledgement."""
    data = p.channel_model()
    ack = p.ack_model if p.ack_model is not None else data
    return ProcessNetwork(
        [
            Process("Planner", planner(p.n)),
            Process("Controller", controller(p.n)),
            _channel("q1", data),
            _channel("q2", ack),
        ],
        closed=True,
    )


@dataclass(frozen=True)
class Case2Params:
    n1: int = 100
    n2: int = 100
    n3: int = 100
    size: int = 1
    nonblocking_first: bool = False
    # producers may stop after any completed send; the consumer must finish its loop
    producers_may_stop: bool = True

    def __post_init__(self):
        if min(self.n1, self.n2, self.n3) < 1 or self.size < 1:
            raise ConstructionError("loop bounds and buffer size must be at least 1")


def producer(name: str, channel: str, n: int, may_stop: bool) -> Process:
    p = _Program(inputs=[], outputs=[f"{channel}_write"])
    sends = [p.state(f"send{i + 1}") for i in range(n)]
    done = p.state("done")
    for i, q in enumerate(sends):
        p.add(q, f"{channel}_write", sends[i + 1] if i + 1 < n else done)
    ia = p.build()
    return Process(name, ia, terminal=ia.states if may_stop else {done})


def consumer(n3: int, nonblocking_first: bool) -> Process:
    outs = ["q1_read_nb" if nonblocking_first else "q1_read", "q2_read"]
    ins = ["q1_rok", "q2_rok"] + (["q1_nodata"] if nonblocking_first else [])
    p = _Program(ins, outs)
    heads = [p.state(f"iter{i + 1}") for i in range(n3)]
    done = p.state("done")
    for i in range(n3):
        w1 = p.state(f"wait_q1_{i + 1}")
        r2 = p.state(f"read_q2_{i + 1}")
        w2 = p.state(f"wait_q2_{i + 1}")
        nxt = heads[i + 1] if i + 1 < n3 else done
        p.add(heads[i], outs[0], w1)
        p.add(w1, "q1_rok", r2)
        if nonblocking_first:
            p.add(w1, "q1_nodata", r2)
        p.add(r2, "q2_read", w2)
        p.add(w2, "q2_rok", nxt)
    return Process("P3", p.build(), terminal={done})


def build_case2(p: Case2Params, compress: bool = False) -> ProcessNetwork:
    """Two producers feeding one consumer that reads both channels alternately."""
    if compress:
        p = compress_case2(p)
    strict = PortKind(STRICT, p.size)
    if p.nonblocking_first:
        kind1 = PortKind(STRICT, p.size, frozenset({NONBLOCKING_READ}))
        ch1 = restrict_inputs(learned_port(kind1, "delivery-nodata"), [WRITE, READ_NB])
    else:
        ch1 = learned_port(strict)
    ch2 = learned_port(strict)
    return ProcessNetwork(
        [
            producer("P1", "q1", p.n1, p.producers_may_stop),
            producer("P2", "q2", p.n2, p.producers_may_stop),
            consumer(p.n3, p.nonblocking_first),
            _channel("q1", ch1),
            _channel("q2", ch2),
        ],
        closed=True,
    )


def compress_case2(p: Case2Params) -> Case2Params:
    """Smaller bounds with the same verdict.

    Only the sign and size of ``Ni - N3`` (clipped to ``[-1, size + 1]``)
    and the buffer size matter, so N3 can be cut to ``size + 2``.
    """
    n3 = min(p.n3, p.size + 2)

    def shrink(ni: int) -> int:
        return n3 + max(-1, min(ni - p.n3, p.size + 1))

    return Case2Params(shrink(p.n1), shrink(p.n2), n3, p.size, p.nonblocking_first,
                       p.producers_may_stop)


def interrupt_scenario(mode: str = "actual") -> InterfaceAutomaton:
    """Learned model of a standard port with one reader, one writer and an
    interrupting thread on the write side, observing every completion event."""
    kind = PortKind(STANDARD, None, frozenset({INTERRUPT}), interrupt_mode=mode)
    return learned_port(kind, "events")


def early_unblock_transitions(ia: InterfaceAutomaton) -> List[Tuple[int, str, int]]:
    """``?intr`` steps out of the blocked-writer state that release the write at once.

    The blocked-writer state is the one reached by ``?write`` from the initial
    state; a release shows up as an immediate output mentioning ``wok``.
    """
    blocked = ia.run_fragment(["?" + WRITE]).last
    mid = ia.successor(blocked, "intr")
    if mid is None:
        return []
    return [(blocked, "intr", mid)] if any("wok" in o.split("+") for o in ia.observable_out(mid)) else []

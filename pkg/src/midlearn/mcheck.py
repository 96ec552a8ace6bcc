"""Explicit-state deadlock search over networks of interface automata.

Processes run as an asynchronous interleaving. An output action of one
process that is also an input of another fires jointly with it as a single
step (a rendezvous); the emitter waits while the receiver does not enable
the input. Actions known to a single process fire on their own.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .automata import InterfaceAutomaton
from .errors import CompositionError

CompositeState = Tuple[int, ...]

OK = "OK"
DEADLOCK = "deadlock"
INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Process:
    name: str
    automaton: InterfaceAutomaton
    rename: Mapping[str, str] = field(default_factory=dict)
    # states counting as legitimate completion; empty means the process never ends
    terminal: FrozenSet[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "rename", dict(self.rename))
        object.__setattr__(self, "terminal", frozenset(self.terminal))
        bad = set(self.rename) - self.automaton.signature.actions
        if bad:
            raise CompositionError(f"{self.name}: renaming unknown actions {sorted(bad)}")
        if not self.terminal <= self.automaton.states:
            raise CompositionError(f"{self.name}: terminal marking outside the state set")

    def global_name(self, action: str) -> str:
        return self.rename.get(action, action)

    @property
    def inputs(self) -> FrozenSet[str]:
        return frozenset(self.global_name(a) for a in self.automaton.signature.inputs)

    @property
    def outputs(self) -> FrozenSet[str]:
        return frozenset(self.global_name(a) for a in self.automaton.signature.outputs)


class ProcessNetwork:
    """Processes plus the synchronisation pairs implied by their action names.

    With ``closed=True`` every action must be shared by exactly one emitter
    and one receiver; an unmatched action is reported by name.
    """

    def __init__(self, processes: Sequence[Process], closed: bool = False):
        self.processes: Tuple[Process, ...] = tuple(processes)
        if not self.processes:
            raise CompositionError("empty network")
        names = [p.name for p in self.processes]
        if len(set(names)) != len(names):
            raise CompositionError(f"duplicate process names {names}")
        for p in self.processes:
            sig = p.automaton.signature
            if len(p.inputs) != len(sig.inputs) or len(p.outputs) != len(sig.outputs) or p.inputs & p.outputs:
                raise CompositionError(f"{p.name}: renaming merges distinct actions")
        emitters: Dict[str, List[int]] = {}
        receivers: Dict[str, List[int]] = {}
        for k, p in enumerate(self.processes):
            for a in p.outputs:
                emitters.setdefault(a, []).append(k)
            for a in p.inputs:
                receivers.setdefault(a, []).append(k)
        self.sync: Dict[str, Tuple[int, int]] = {}
        for a in sorted(set(emitters) | set(receivers)):
            e, r = emitters.get(a, []), receivers.get(a, [])
            if len(e) > 1 or len(r) > 1:
                raise CompositionError(
                    f"action {a!r} has emitters {[names[i] for i in e]} and receivers {[names[i] for i in r]}"
                )
            if e and r:
                self.sync[a] = (e[0], r[0])
            elif closed:
                who = names[(e or r)[0]]
                side = "output" if e else "input"
                raise CompositionError(f"unmatched action {a!r} ({side} of {who})")
        self._compile()

    def _compile(self) -> None:
        # moves[k][q]: (global action, partner index or -1, next state) for steps
        # that process k initiates; inmap[k][q]: synchronised inputs it accepts
        self._moves: List[Dict[int, List[Tuple[str, int, int]]]] = []
        self._inmap: List[Dict[int, Dict[str, int]]] = []
        for k, p in enumerate(self.processes):
            a = p.automaton
            moves: Dict[int, List[Tuple[str, int, int]]] = {}
            inmap: Dict[int, Dict[str, int]] = {}
            for q in sorted(a.states):
                mv, im = [], {}
                for x, t in a.outgoing(q):
                    g = p.global_name(x)
                    pair = self.sync.get(g)
                    if pair is None:
                        mv.append((g, -1, t))
                    elif pair[0] == k:
                        mv.append((g, pair[1], t))
                    else:
                        if g in im:
                            raise CompositionError(f"{p.name}: nondeterministic input {g!r}")
                        im[g] = t
                moves[q] = mv
                inmap[q] = im
            self._moves.append(moves)
            self._inmap.append(inmap)
        self._terminal = [p.terminal for p in self.processes]

    @property
    def initial(self) -> CompositeState:
        return tuple(p.automaton.initial for p in self.processes)

    def successors(self, s: CompositeState) -> List[Tuple[str, CompositeState]]:
        out = []
        inmap = self._inmap
        for k, moves in enumerate(self._moves):
            for a, j, t in moves[s[k]]:
                if j < 0:
                    nxt = list(s)
                    nxt[k] = t
                    out.append((a, tuple(nxt)))
                else:
                    tj = inmap[j][s[j]].get(a)
                    if tj is not None:
                        nxt = list(s)
                        nxt[k] = t
                        nxt[j] = tj
                        out.append((a, tuple(nxt)))
        return out

    def is_terminal(self, s: CompositeState) -> bool:
        return all(q in term for q, term in zip(s, self._terminal))

    def describe(self, s: CompositeState) -> str:
        parts = []
        for p, q in zip(self.processes, s):
            parts.append(f"{p.name}={p.automaton.names.get(q, q)}")
        return " ".join(parts)


def compose_step(net: ProcessNetwork, s: CompositeState) -> List[Tuple[str, CompositeState]]:
    return net.successors(s)


@dataclass
class Verdict:
    conclusion: str
    witness: Optional[List[Tuple[str, CompositeState]]] = None
    states_explored: int = 0
    elapsed: float = 0.0
    peak_memory_estimate: int = 0
    initial: Optional[CompositeState] = None

    @property
    def deadlock(self) -> bool:
        return self.conclusion == DEADLOCK

    @property
    def stuck_state(self) -> Optional[CompositeState]:
        if not self.witness:
            return self.initial if self.deadlock else None
        return self.witness[-1][1]

    def to_dict(self) -> dict:
        return {
            "conclusion": self.conclusion,
            "states": self.states_explored,
            "time": round(self.elapsed, 3),
            "memory": self.peak_memory_estimate,
            "witness": [[a, list(s)] for a, s in self.witness] if self.witness is not None else None,
        }


def find_deadlock(
    net: ProcessNetwork,
    max_states: Optional[int] = None,
    max_time: Optional[float] = None,
    order: str = "dfs",
) -> Verdict:
    """Search reachable composite states for one that is stuck before completion.

    A state is a deadlock when it has no successor and some process is outside
    its terminal marking. Hitting ``max_states`` or ``max_time`` yields an
    ``inconclusive`` verdict. ``peak_memory_estimate`` counts stored states plus
    the peak size of the search frontier.
    """
    if order not in ("dfs", "bfs"):
        raise ValueError(f"unknown search order {order!r}")
    if (max_states is not None and max_states <= 0) or (max_time is not None and max_time <= 0):
        raise ValueError("limits must be positive")
    search = _dfs if order == "dfs" else _bfs
    started = time.perf_counter()
    deadline = None if max_time is None else started + max_time
    verdict = search(net, max_states, deadline)
    verdict.elapsed = time.perf_counter() - started
    verdict.initial = net.initial
    return verdict


def _over(visited, max_states, deadline) -> bool:
    if max_states is not None and len(visited) > max_states:
        return True
    return deadline is not None and len(visited) % 1024 == 0 and time.perf_counter() > deadline


def _dfs(net, max_states, deadline) -> Verdict:
    init = net.initial
    visited = {init}
    succ = net.successors(init)
    if not succ and not net.is_terminal(init):
        return Verdict(DEADLOCK, [], 1, peak_memory_estimate=1)
    stack = [iter(succ)]
    path: List[Tuple[str, CompositeState]] = []
    peak = 1
    while stack:
        for a, t in stack[-1]:
            if t in visited:
                continue
            visited.add(t)
            path.append((a, t))
            succ = net.successors(t)
            if not succ and not net.is_terminal(t):
                return Verdict(DEADLOCK, path, len(visited), peak_memory_estimate=len(visited) + len(stack))
            if _over(visited, max_states, deadline):
                return Verdict(INCONCLUSIVE, None, len(visited), peak_memory_estimate=len(visited) + peak)
            stack.append(iter(succ))
            if len(stack) > peak:
                peak = len(stack)
            break
        else:
            stack.pop()
            if path:
                path.pop()
    return Verdict(OK, None, len(visited), peak_memory_estimate=len(visited) + peak)


def _bfs(net, max_states, deadline) -> Verdict:
    init = net.initial
    parent: Dict[CompositeState, Optional[Tuple[CompositeState, str]]] = {init: None}
    queue = deque([init])
    peak = 1
    while queue:
        s = queue.popleft()
        succ = net.successors(s)
        if not succ and not net.is_terminal(s):
            path = []
            cur = s
            while parent[cur] is not None:
                prev, a = parent[cur]
                path.append((a, cur))
                cur = prev
            path.reverse()
            return Verdict(DEADLOCK, path, len(parent), peak_memory_estimate=len(parent) + peak)
        for a, t in succ:
            if t not in parent:
                parent[t] = (s, a)
                queue.append(t)
                if _over(parent, max_states, deadline):
                    return Verdict(INCONCLUSIVE, None, len(parent), peak_memory_estimate=len(parent) + peak)
        if len(queue) > peak:
            peak = len(queue)
    return Verdict(OK, None, len(parent), peak_memory_estimate=len(parent) + peak)


def replay(net: ProcessNetwork, witness: Iterable[Tuple[str, CompositeState]]) -> CompositeState:
    """Follow a witness from the initial state, checking every step is a real successor."""
    s = net.initial
    for a, t in witness:
        if (a, t) not in net.successors(s):
            raise ValueError(f"witness step {a!r} -> {t} is not enabled in {s}")
        s = t
    return s

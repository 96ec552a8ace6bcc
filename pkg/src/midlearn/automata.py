"""Interface automata, Mealy machines and the structural algorithms between them.

States are plain integers. Any human readable naming lives in the optional
``names`` mapping and never takes part in hashing, minimization or
isomorphism checks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import ConstructionError, IncomparableAutomata, MalformedQuery

QUIESCENCE = "quiescence"
# Output reported when the harness does not allow an input in the current state.
DISABLED = "refused"

Transition = Tuple[int, str, int]


@dataclass(frozen=True)
class ActionSignature:
    inputs: FrozenSet[str]
    outputs: FrozenSet[str]

    def __init__(self, inputs: Iterable[str], outputs: Iterable[str]):
        object.__setattr__(self, "inputs", frozenset(inputs))
        object.__setattr__(self, "outputs", frozenset(outputs))
        if not self.inputs and not self.outputs:
            raise ConstructionError("an action signature needs at least one action")
        overlap = self.inputs & self.outputs
        if overlap:
            raise ConstructionError(f"actions both input and output: {sorted(overlap)}")
        for a in self.inputs | self.outputs:
            if not isinstance(a, str) or not a or any(c.isspace() for c in a):
                raise ConstructionError(f"bad action symbol {a!r}")

    @property
    def actions(self) -> FrozenSet[str]:
        return self.inputs | self.outputs

    def label(self, action: str) -> str:
        """Render an action the way figures do: ``?a`` for inputs, ``!a`` for outputs."""
        return ("?" if action in self.inputs else "!") + action


@dataclass(frozen=True)
class ExecutionFragment:
    """Alternating states and actions ``q0 a0 q1 ... qn``.

    ``failed_at`` is the index of the first action that could not be taken,
    or None when the whole sequence was executed.
    """

    states: Tuple[int, ...]
    actions: Tuple[str, ...]
    failed_at: Optional[int] = None

    @property
    def complete(self) -> bool:
        return self.failed_at is None

    @property
    def last(self) -> int:
        return self.states[-1]


class InterfaceAutomaton:
    """The quintuple (I, O, Q, q0, ->) with an index for fast lookups."""

    def __init__(
        self,
        signature: ActionSignature,
        states: Iterable[int],
        initial: int,
        transitions: Iterable[Transition],
        names: Optional[Mapping[int, str]] = None,
    ):
        self.signature = signature
        self.states: FrozenSet[int] = frozenset(states)
        self.initial = initial
        self.transitions: FrozenSet[Transition] = frozenset(transitions)
        self.names: Dict[int, str] = dict(names or {})
        if not self.states:
            raise ConstructionError("an automaton needs at least one state")
        if initial not in self.states:
            raise ConstructionError(f"initial state {initial} is not a state")
        acts = signature.actions
        index: Dict[int, Dict[str, FrozenSet[int]]] = {q: {} for q in self.states}
        for q, a, q2 in self.transitions:
            if q not in self.states or q2 not in self.states:
                raise ConstructionError(f"transition {(q, a, q2)} leaves the state set")
            if a not in acts:
                raise ConstructionError(f"transition {(q, a, q2)} has unknown label {a!r}")
            index[q][a] = index[q].get(a, frozenset()) | {q2}
        self._index = index

    # equality and hashing are structural over ids, not names
    def _key(self):
        return (self.signature, self.states, self.initial, self.transitions)

    def __eq__(self, other):
        return isinstance(other, InterfaceAutomaton) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return (
            f"InterfaceAutomaton(|Q|={len(self.states)}, |T|={len(self.transitions)}, "
            f"I={sorted(self.signature.inputs)}, O={sorted(self.signature.outputs)})"
        )

    def _check_state(self, q: int) -> None:
        if q not in self.states:
            raise MalformedQuery(f"unknown state {q!r}")

    def next_states(self, q: int, a: str) -> FrozenSet[int]:
        self._check_state(q)
        if a not in self.signature.actions:
            raise MalformedQuery(f"unknown action {a!r}")
        return self._index[q].get(a, frozenset())

    def enabled(self, q: int) -> FrozenSet[str]:
        self._check_state(q)
        return frozenset(self._index[q])

    def observable_out(self, q: int) -> FrozenSet[str]:
        return self.enabled(q) & self.signature.outputs

    def is_quiescent(self, q: int) -> bool:
        return not self.observable_out(q)

    def outgoing(self, q: int) -> List[Tuple[str, int]]:
        """Sorted (action, target) pairs leaving ``q``."""
        self._check_state(q)
        return sorted((a, t) for a, ts in self._index[q].items() for t in ts)

    def is_deterministic(self) -> bool:
        return all(len(ts) <= 1 for row in self._index.values() for ts in row.values())

    def is_input_enabled(self) -> bool:
        return all(self.signature.inputs <= set(row) for row in self._index.values())

    def successor(self, q: int, a: str) -> Optional[int]:
        ts = self.next_states(q, a)
        if len(ts) > 1:
            raise MalformedQuery(f"state {q} is nondeterministic on {a!r}")
        return next(iter(ts)) if ts else None

    def reachable(self) -> FrozenSet[int]:
        seen = {self.initial}
        todo = [self.initial]
        while todo:
            q = todo.pop()
            for ts in self._index[q].values():
                for t in ts:
                    if t not in seen:
                        seen.add(t)
                        todo.append(t)
        return frozenset(seen)

    def run_fragment(self, actions: Sequence[str]) -> ExecutionFragment:
        """Follow ``actions`` from the initial state.

        Actions may be given bare (``write``) or decorated (``?write``); a
        decoration that contradicts the signature is a malformed query.
        """
        if not self.is_deterministic():
            raise MalformedQuery("run_fragment needs a deterministic automaton")
        plain = [self._strip(a) for a in actions]
        states = [self.initial]
        for i, a in enumerate(plain):
            nxt = self.successor(states[-1], a)
            if nxt is None:
                return ExecutionFragment(tuple(states), tuple(plain[:i]), failed_at=i)
            states.append(nxt)
        return ExecutionFragment(tuple(states), tuple(plain))

    def _strip(self, a: str) -> str:
        if a and a[0] in "?!":
            bare = a[1:]
            want = self.signature.inputs if a[0] == "?" else self.signature.outputs
            if bare not in want:
                raise MalformedQuery(f"{a!r} does not match the action signature")
            return bare
        if a not in self.signature.actions:
            raise MalformedQuery(f"unknown action {a!r}")
        return a


class MealyMachine:
    """Deterministic, input-complete transducer with one output per step.

    ``delta`` maps ``(state, input)`` to ``(output, next_state)``. States are
    ``0..n-1`` and ``inputs`` is kept in a fixed order, which makes the
    canonical numbering produced by :func:`minimize_mealy` reproducible.
    """

    def __init__(
        self,
        inputs: Sequence[str],
        n_states: int,
        initial: int,
        delta: Mapping[Tuple[int, str], Tuple[str, int]],
        quiescence: str = QUIESCENCE,
        disabled: Optional[str] = DISABLED,
        outputs: Iterable[str] = (),
    ):
        self.inputs: Tuple[str, ...] = tuple(inputs)
        if not self.inputs or len(set(self.inputs)) != len(self.inputs):
            raise ConstructionError("Mealy inputs must be non-empty and distinct")
        if n_states < 1 or not 0 <= initial < n_states:
            raise ConstructionError("bad state count or initial state")
        self.n_states = n_states
        self.initial = initial
        self.quiescence = quiescence
        self.disabled = disabled
        self.delta: Dict[Tuple[int, str], Tuple[str, int]] = dict(delta)
        for q in range(n_states):
            for i in self.inputs:
                if (q, i) not in self.delta:
                    raise ConstructionError(f"Mealy machine is not input-complete at {(q, i)}")
        if len(self.delta) != n_states * len(self.inputs):
            raise ConstructionError("transition map mentions unknown states or inputs")
        for o, t in self.delta.values():
            if not 0 <= t < n_states:
                raise ConstructionError(f"target {t} out of range")
        self.outputs: FrozenSet[str] = (
            frozenset(outputs) | {o for o, _ in self.delta.values()} | {quiescence}
        )

    @property
    def states(self) -> range:
        return range(self.n_states)

    def step(self, q: int, i: str) -> Tuple[str, int]:
        try:
            return self.delta[(q, i)]
        except KeyError:
            raise MalformedQuery(f"no transition for {(q, i)}") from None

    def run(self, word: Sequence[str], start: Optional[int] = None) -> Tuple[str, ...]:
        q = self.initial if start is None else start
        out = []
        for i in word:
            o, q = self.step(q, i)
            out.append(o)
        return tuple(out)

    def state_after(self, word: Sequence[str]) -> int:
        q = self.initial
        for i in word:
            q = self.step(q, i)[1]
        return q

    def __repr__(self):
        return f"MealyMachine(|Q|={self.n_states}, I={list(self.inputs)})"


def _canonical_order(initial, inputs, succ) -> Dict[int, int]:
    """BFS numbering from ``initial`` following inputs in order."""
    order = {initial: 0}
    queue = deque([initial])
    while queue:
        q = queue.popleft()
        for i in inputs:
            t = succ(q, i)
            if t is not None and t not in order:
                order[t] = len(order)
                queue.append(t)
    return order


def minimize_mealy(m: MealyMachine) -> MealyMachine:
    """Minimal equivalent machine, canonically numbered by BFS from the initial state.

    Unreachable states are dropped first, then blocks are refined until every
    block agrees on outputs and successor blocks (Moore's algorithm).
    """
    reach = _canonical_order(m.initial, m.inputs, lambda q, i: m.delta[(q, i)][1])
    states = sorted(reach, key=reach.get)
    block = {q: tuple(m.delta[(q, i)][0] for i in m.inputs) for q in states}
    n_blocks = len(set(block.values()))
    while True:
        sig = {q: (block[q],) + tuple(block[m.delta[(q, i)][1]] for i in m.inputs) for q in states}
        ids: Dict[tuple, int] = {}
        new_block = {q: ids.setdefault(sig[q], len(ids)) for q in states}
        if len(ids) == n_blocks:
            break
        block, n_blocks = new_block, len(ids)
    block = new_block
    # pick a representative per block and renumber canonically
    rep: Dict[int, int] = {}
    for q in states:
        rep.setdefault(block[q], q)
    order = _canonical_order(
        block[m.initial], m.inputs, lambda b, i: block[m.delta[(rep[b], i)][1]]
    )
    delta = {}
    for b, idx in order.items():
        for i in m.inputs:
            o, t = m.delta[(rep[b], i)]
            delta[(idx, i)] = (o, order[block[t]])
    return MealyMachine(
        m.inputs, len(order), 0, delta, quiescence=m.quiescence, disabled=m.disabled,
        outputs=m.outputs,
    )


def minimize_ia(a: InterfaceAutomaton) -> InterfaceAutomaton:
    """Merge behaviourally equivalent states of a deterministic automaton.

    Inputs and outputs are treated alike as edge labels; two states are merged
    when they enable the same labels and lead to equivalent states.
    """
    if not a.is_deterministic():
        raise MalformedQuery("minimize_ia needs a deterministic automaton")
    labels = sorted(a.signature.actions)
    states = sorted(a.reachable())
    succ = {q: {x: a.successor(q, x) for x in a.enabled(q)} for q in states}
    block = {q: 0 for q in states}
    n_blocks = 1
    while True:
        sig = {q: tuple(sorted((x, block[t]) for x, t in succ[q].items())) + (block[q],) for q in states}
        ids: Dict[tuple, int] = {}
        new_block = {q: ids.setdefault(sig[q], len(ids)) for q in states}
        if len(ids) == n_blocks:
            break
        block, n_blocks = new_block, len(ids)
    block = new_block
    rep: Dict[int, int] = {}
    for q in states:
        rep.setdefault(block[q], q)
    order = _canonical_order(
        block[a.initial], labels,
        lambda b, x: block[succ[rep[b]][x]] if x in succ[rep[b]] else None,
    )
    trans = {(order[b], x, order[block[t]]) for b in order for x, t in succ[rep[b]].items()}
    names = {order[b]: a.names[rep[b]] for b in order if rep[b] in a.names}
    return InterfaceAutomaton(a.signature, range(len(order)), 0, trans, names)


def mealy_to_ia(m: MealyMachine, minimize: bool = True) -> InterfaceAutomaton:
    """Translate a learned Mealy machine into an interface automaton.

    A step ``q --i/o--> q'`` becomes ``q --?i--> m --!o--> q'`` through a fresh
    state ``m``. Quiescent steps become a single ``?i`` transition. Steps whose
    output is the machine's ``disabled`` symbol must be self-loops and are
    left out, so the input is simply not enabled there.
    """
    n = m.n_states
    trans = set()
    fresh = n
    outputs = set()
    for (q, i), (o, t) in sorted(m.delta.items()):
        if m.disabled is not None and o == m.disabled:
            if t != q:
                raise ConstructionError(f"disabled step at {(q, i)} changes state")
            continue
        if o == m.quiescence:
            trans.add((q, i, t))
            continue
        if o in m.inputs:
            raise ConstructionError(f"output {o!r} clashes with an input name")
        trans.add((q, i, fresh))
        trans.add((fresh, o, t))
        outputs.add(o)
        fresh += 1
    sig = ActionSignature(m.inputs, outputs)
    ia = InterfaceAutomaton(sig, range(fresh), m.initial, trans)
    return minimize_ia(ia) if minimize else ia


def distinguishing_word(a: MealyMachine, b: MealyMachine) -> Optional[Tuple[str, ...]]:
    """Shortest input word on which the two machines produce different outputs."""
    if set(a.inputs) != set(b.inputs):
        raise IncomparableAutomata("Mealy machines over different inputs")
    start = (a.initial, b.initial)
    parent: Dict[Tuple[int, int], Optional[Tuple[Tuple[int, int], str]]] = {start: None}
    queue = deque([start])
    while queue:
        pa, pb = pair = queue.popleft()
        for i in a.inputs:
            oa, ta = a.delta[(pa, i)]
            ob, tb = b.delta[(pb, i)]
            if oa != ob:
                word = [i]
                cur = pair
                while parent[cur] is not None:
                    cur, x = parent[cur]
                    word.append(x)
                return tuple(reversed(word))
            nxt = (ta, tb)
            if nxt not in parent:
                parent[nxt] = (pair, i)
                queue.append(nxt)
    return None


def isomorphic(a: InterfaceAutomaton, b: InterfaceAutomaton) -> Optional[Dict[int, int]]:
    """Label-preserving bijection between the reachable parts, or None.

    Both automata must be deterministic, so the mapping is forced by walking
    them in lockstep from their initial states.
    """
    if a.signature != b.signature:
        raise IncomparableAutomata(
            f"signatures differ: {sorted(a.signature.actions)} vs {sorted(b.signature.actions)}"
        )
    if not (a.is_deterministic() and b.is_deterministic()):
        raise MalformedQuery("isomorphism check needs deterministic automata")
    fwd = {a.initial: b.initial}
    back = {b.initial: a.initial}
    todo = [a.initial]
    while todo:
        qa = todo.pop()
        qb = fwd[qa]
        if a.enabled(qa) != b.enabled(qb):
            return None
        for x in a.enabled(qa):
            ta, tb = a.successor(qa, x), b.successor(qb, x)
            if ta in fwd or tb in back:
                if fwd.get(ta) != tb or back.get(tb) != ta:
                    return None
                continue
            fwd[ta] = tb
            back[tb] = ta
            todo.append(ta)
    return fwd


def mealy_isomorphic(a: MealyMachine, b: MealyMachine) -> bool:
    """Exact structural equality of reachable parts (up to renumbering)."""
    if a.inputs != b.inputs and set(a.inputs) != set(b.inputs):
        raise IncomparableAutomata("Mealy machines over different inputs")
    fwd = {a.initial: b.initial}
    back = {b.initial: a.initial}
    todo = [a.initial]
    while todo:
        qa = todo.pop()
        qb = fwd[qa]
        for i in a.inputs:
            oa, ta = a.delta[(qa, i)]
            ob, tb = b.delta[(qb, i)]
            if oa != ob:
                return False
            if ta in fwd or tb in back:
                if fwd.get(ta) != tb or back.get(tb) != ta:
                    return False
                continue
            fwd[ta], back[tb] = tb, ta
            todo.append(ta)
    return True


def behaviour_differences(
    a: InterfaceAutomaton, b: InterfaceAutomaton
) -> List[Tuple[Tuple[str, ...], str, str]]:
    """Where two deterministic automata stop agreeing, walking them in lockstep.

    Returns ``(access word, action, side)`` triples, ``side`` naming the
    automaton ("a" or "b") that enables ``action`` after the access word.
    """
    start = (a.initial, b.initial)
    seen = {start: ()}
    queue = deque([start])
    diffs = []
    while queue:
        qa, qb = pair = queue.popleft()
        ea, eb = a.enabled(qa), b.enabled(qb)
        for x in sorted(ea ^ eb):
            diffs.append((seen[pair], x, "a" if x in ea else "b"))
        for x in sorted(ea & eb):
            nxt = (a.successor(qa, x), b.successor(qb, x))
            if nxt not in seen:
                seen[nxt] = seen[pair] + (x,)
                queue.append(nxt)
    return diffs

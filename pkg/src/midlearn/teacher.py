"""Output and equivalence queries against a resettable system under learning.

The :class:`Teacher` stands in for the minimally adequate teacher. Output
queries go through a prefix-tree cache so that a word already covered by an
executed trace never costs another reset. Equivalence is approximated by a
W-method suite followed by seeded random words.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Protocol, Sequence, Tuple

from .automata import MealyMachine, distinguishing_word
from .errors import AlphabetError, DeterminismViolation, SessionStateError

Word = Tuple[str, ...]


class SulSession(Protocol):
    """A system under learning: reset, then feed one input at a time."""

    inputs: Tuple[str, ...]
    outputs: frozenset

    def reset(self) -> None: ...

    def step(self, symbol: str) -> str: ...


class MealySul:
    """Expose a known Mealy machine as a SUL; handy as a perfect test double."""

    def __init__(self, machine: MealyMachine):
        self.machine = machine
        self.inputs = machine.inputs
        self.outputs = machine.outputs
        self._state: Optional[int] = None
        self.resets = 0

    def reset(self) -> None:
        self._state = self.machine.initial
        self.resets += 1

    def step(self, symbol: str) -> str:
        if self._state is None:
            raise SessionStateError("step before reset")
        if symbol not in self.inputs:
            raise AlphabetError(f"unknown input {symbol!r}")
        out, self._state = self.machine.step(self._state, symbol)
        return out


class _Node:
    __slots__ = ("output", "children")

    def __init__(self, output: Optional[str] = None):
        self.output = output
        self.children: Dict[str, _Node] = {}


class TraceCache:
    """Prefix tree of executed runs; edges are inputs, nodes carry the output."""

    def __init__(self):
        self.root = _Node()
        self.size = 0

    def lookup(self, word: Sequence[str]) -> Optional[Word]:
        node = self.root
        out = []
        for i in word:
            node = node.children.get(i)
            if node is None:
                return None
            out.append(node.output)
        return tuple(out)

    def insert(self, word: Sequence[str], outputs: Sequence[str]) -> None:
        if len(word) != len(outputs):
            raise ValueError("word and output lengths differ")
        node = self.root
        for k, (i, o) in enumerate(zip(word, outputs)):
            child = node.children.get(i)
            if child is None:
                child = node.children[i] = _Node(o)
                self.size += 1
            elif child.output != o:
                raise DeterminismViolation(
                    f"input {' '.join(word[:k + 1])!r} produced {o!r}, earlier {child.output!r}"
                )
            node = child

    def traces(self) -> Iterator[Tuple[Word, Word]]:
        """Maximal stored runs (root-to-leaf paths)."""
        stack: List[Tuple[_Node, Word, Word]] = [(self.root, (), ())]
        while stack:
            node, w, o = stack.pop()
            if not node.children and w:
                yield w, o
            for i in sorted(node.children, reverse=True):
                c = node.children[i]
                stack.append((c, w + (i,), o + (c.output,)))

    def to_dot(self) -> str:
        lines = ["digraph cache {", "  n0 [label=\"\"];"]
        ids = {id(self.root): 0}
        queue = deque([self.root])
        while queue:
            node = queue.popleft()
            for i in sorted(node.children):
                c = node.children[i]
                ids[id(c)] = len(ids)
                lines.append(f"  n{ids[id(c)]} [label=\"\"];")
                lines.append(f"  n{ids[id(node)]} -> n{ids[id(c)]} [label=\"{i}/{c.output}\"];")
                queue.append(c)
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass
class EqConfig:
    extra_states: int = 2
    random_words: int = 100
    max_word_len: int = 20
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("extra_states", "random_words", "max_word_len"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def _state_cover(m: MealyMachine) -> Dict[int, Word]:
    access = {m.initial: ()}
    queue = deque([m.initial])
    while queue:
        q = queue.popleft()
        for i in m.inputs:
            t = m.delta[(q, i)][1]
            if t not in access:
                access[t] = access[q] + (i,)
                queue.append(t)
    return access


def _separating_word(m: MealyMachine, p: int, q: int) -> Optional[Word]:
    start = (p, q)
    seen = {start: ()}
    queue = deque([start])
    while queue:
        a, b = pair = queue.popleft()
        for i in m.inputs:
            oa, ta = m.delta[(a, i)]
            ob, tb = m.delta[(b, i)]
            w = seen[pair] + (i,)
            if oa != ob:
                return w
            if (ta, tb) not in seen:
                seen[(ta, tb)] = w
                queue.append((ta, tb))
    return None


def characterization_set(m: MealyMachine) -> List[Word]:
    """Single inputs plus a separating word for every pair of reachable states."""
    states = sorted(_state_cover(m))
    words = {(i,) for i in m.inputs}
    for p, q in itertools.combinations(states, 2):
        w = _separating_word(m, p, q)
        if w is not None:
            words.add(w)
    return sorted(words, key=lambda w: (len(w), w))


def w_method_suite(m: MealyMachine, extra_states: int) -> List[Word]:
    """Transition cover x inputs^{<=k} x W, deduplicated, in shortlex order."""
    access = _state_cover(m)
    cover = {()} | set(access.values())
    cover |= {w + (i,) for w in access.values() for i in m.inputs}
    middles = [()]
    for k in range(1, extra_states + 1):
        middles += list(itertools.product(m.inputs, repeat=k))
    w_set = characterization_set(m)
    suite = {p + mid + w for p in cover for mid in middles for w in w_set}
    return sorted(suite, key=lambda w: (len(w), w))


class Teacher:
    """Answers the learner's queries for one SUL session, which it owns exclusively.

    ``reference`` switches equivalence queries to an exact comparison with a
    known machine (a perfect oracle, for testing the learner in isolation).
    """

    def __init__(
        self,
        sul: SulSession,
        eq: Optional[EqConfig] = None,
        use_cache: bool = True,
        reference: Optional[MealyMachine] = None,
    ):
        self.sul = sul
        self.eq = eq or EqConfig()
        self.use_cache = use_cache
        self.reference = reference
        self.cache = TraceCache()
        self._rng = random.Random(self.eq.rng_seed)
        self.experiments = 0
        self.mm_queries = 0
        self.eq_queries = 0
        self.cache_hits = 0

    @property
    def inputs(self) -> Tuple[str, ...]:
        return tuple(self.sul.inputs)

    def execute(self, word: Sequence[str]) -> Word:
        """Run ``word`` on the SUL from reset, bypassing the cache lookup."""
        self.sul.reset()
        self.experiments += 1
        out = tuple(self.sul.step(i) for i in word)
        if self.use_cache:
            self.cache.insert(word, out)
        return out

    def _answer(self, word: Sequence[str]) -> Tuple[Word, bool]:
        word = tuple(word)
        for i in word:
            if i not in self.sul.inputs:
                raise AlphabetError(f"unknown input {i!r}")
        if not word:
            return (), False
        if self.use_cache:
            hit = self.cache.lookup(word)
            if hit is not None:
                self.cache_hits += 1
                return hit, False
        return self.execute(word), True

    def output_query(self, word: Sequence[str]) -> Word:
        out, executed = self._answer(word)
        if executed:
            self.mm_queries += 1
        return out

    def equivalence_query(self, hypothesis: MealyMachine) -> Optional[Word]:
        """First failing test word, cut at its first mismatching output, or None."""
        self.eq_queries += 1
        if self.reference is not None:
            return distinguishing_word(hypothesis, self.reference)
        for word in self._test_words(hypothesis):
            got, _ = self._answer(word)
            want = hypothesis.run(word)
            if got != want:
                k = next(j for j, (a, b) in enumerate(zip(got, want)) if a != b)
                return tuple(word[: k + 1])
        return None

    def _test_words(self, hypothesis: MealyMachine) -> Iterator[Word]:
        yield from w_method_suite(hypothesis, self.eq.extra_states)
        inputs = hypothesis.inputs
        for _ in range(self.eq.random_words):
            n = self._rng.randint(1, max(1, self.eq.max_word_len))
            yield tuple(self._rng.choice(inputs) for _ in range(n))

    def replay_mismatches(self, hypothesis: MealyMachine) -> int:
        """How many cached traces the hypothesis disagrees with."""
        return sum(hypothesis.run(w) != o for w, o in self.cache.traces())

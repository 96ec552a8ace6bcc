"""Observation-table learning of Mealy machines (L+_M) and the IA learner on top."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .automata import InterfaceAutomaton, MealyMachine, mealy_to_ia
from .teacher import Teacher, Word

log = logging.getLogger(__name__)


def _shortlex(w: Word):
    return (len(w), w)


@dataclass
class LearnStats:
    mm_queries: int = 0
    eq_queries: int = 0
    experiments: int = 0
    elapsed: float = 0.0
    cache_hits: int = 0
    conjecture_sizes: List[int] = field(default_factory=list)

    def as_row(self) -> Dict[str, object]:
        return {
            "#MM": self.mm_queries,
            "#EQ": self.eq_queries,
            "#Experiments": self.experiments,
            "Time": round(self.elapsed, 3),
        }


class ObservationTable:
    """Rows are access words (short rows S and their one-letter extensions),
    columns are suffixes, cells hold the output the SUL gives on the suffix."""

    def __init__(self, inputs: Sequence[str], query: Callable[[Word], Word]):
        self.inputs: Tuple[str, ...] = tuple(inputs)
        self.query = query
        self.short: List[Word] = [()]
        self.suffixes: List[Word] = [(i,) for i in self.inputs]
        self.cells: Dict[Word, Dict[Word, Word]] = {}

    @property
    def extensions(self) -> List[Word]:
        short = set(self.short)
        ext = {s + (i,) for s in self.short for i in self.inputs} - short
        return sorted(ext, key=_shortlex)

    def fill(self) -> None:
        for w in self.short + self.extensions:
            row = self.cells.setdefault(w, {})
            for e in self.suffixes:
                if e not in row:
                    row[e] = self.query(w + e)[len(w):]

    def row(self, w: Word) -> Tuple[Word, ...]:
        cells = self.cells[w]
        return tuple(cells[e] for e in self.suffixes)

    def find_unclosed(self) -> Optional[Word]:
        short_rows = {self.row(s) for s in self.short}
        for w in self.extensions:
            if self.row(w) not in short_rows:
                return w
        return None

    def find_inconsistency(self) -> Optional[Word]:
        by_row: Dict[tuple, Word] = {}
        for s in self.short:
            r = self.row(s)
            other = by_row.setdefault(r, s)
            if other is s:
                continue
            for i in self.inputs:
                a, b = self.cells[s + (i,)], self.cells[other + (i,)]
                for e in self.suffixes:
                    if a[e] != b[e]:
                        return (i,) + e
        return None

    def conjecture(self) -> MealyMachine:
        ids: Dict[tuple, int] = {}
        rep: List[Word] = []
        for s in self.short:
            r = self.row(s)
            if r not in ids:
                ids[r] = len(rep)
                rep.append(s)
        delta = {}
        for q, s in enumerate(rep):
            for i in self.inputs:
                out = self.cells[s][(i,)][0]
                delta[(q, i)] = (out, ids[self.row(s + (i,))])
        return MealyMachine(self.inputs, len(rep), 0, delta)

    def add_counterexample(self, cex: Word) -> None:
        """Strip the longest prefix already in the table; every suffix of the
        rest becomes a column."""
        rows = set(self.short) | set(self.extensions)
        k = max(j for j in range(len(cex) + 1) if cex[:j] in rows)
        added = self._add_suffixes(cex[k:])
        if not added:
            added = self._add_suffixes(cex)
        if not added:
            raise RuntimeError(f"counterexample {cex!r} adds no new column")

    def _add_suffixes(self, v: Word) -> bool:
        have = set(self.suffixes)
        new = [v[j:] for j in range(len(v)) if v[j:] not in have]
        for e in sorted(set(new), key=_shortlex):
            self.suffixes.append(e)
        return bool(new)


def learn_mealy(
    teacher: Teacher,
    inputs: Optional[Sequence[str]] = None,
    on_conjecture: Optional[Callable[[MealyMachine, Teacher], None]] = None,
) -> Tuple[MealyMachine, LearnStats]:
    """Learn a Mealy machine by output and equivalence queries to ``teacher``.

    ``on_conjecture`` is called with each hypothesis just before it is handed
    to the equivalence query.
    """
    inputs = tuple(inputs if inputs is not None else teacher.inputs)
    if not inputs:
        raise ValueError("need at least one input symbol")
    started = time.perf_counter()
    stats = LearnStats()
    table = ObservationTable(inputs, teacher.output_query)
    table.fill()
    while True:
        while True:
            u = table.find_unclosed()
            if u is not None:
                table.short.append(u)
                table.fill()
                continue
            e = table.find_inconsistency()
            if e is not None:
                table.suffixes.append(e)
                table.fill()
                continue
            break
        hyp = table.conjecture()
        stats.conjecture_sizes.append(hyp.n_states)
        if on_conjecture is not None:
            on_conjecture(hyp, teacher)
        cex = teacher.equivalence_query(hyp)
        log.debug("conjecture with %d states, counterexample %r", hyp.n_states, cex)
        if cex is None:
            break
        table.add_counterexample(tuple(cex))
        table.fill()
    stats.mm_queries = teacher.mm_queries
    stats.eq_queries = teacher.eq_queries
    stats.experiments = teacher.experiments
    stats.cache_hits = teacher.cache_hits
    stats.elapsed = time.perf_counter() - started
    return hyp, stats


def learn_ia(
    teacher: Teacher, inputs: Optional[Sequence[str]] = None, **kwargs
) -> Tuple[InterfaceAutomaton, LearnStats]:
    machine, stats = learn_mealy(teacher, inputs, **kwargs)
    return mealy_to_ia(machine), stats

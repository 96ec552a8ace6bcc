import random

import pytest
from hypothesis import given, settings, strategies as st

from midlearn.automata import MealyMachine
from midlearn.errors import AlphabetError, DeterminismViolation, SessionStateError
from midlearn.teacher import (
    EqConfig, MealySul, Teacher, TraceCache, characterization_set, w_method_suite,
)

from oracles import equivalent_mealy, random_mealy, random_minimal_mealy, run_mealy


def counter(n=3):
    delta = {}
    for q in range(n):
        delta[(q, "inc")] = ("tick" if q < n - 1 else "wrap", (q + 1) % n)
        delta[(q, "peek")] = (f"v{q}", q)
    return MealyMachine(["inc", "peek"], n, 0, delta)


class Flaky:
    """Answers differently on every other reset."""

    inputs = ("a",)
    outputs = frozenset({"x", "y"})

    def __init__(self):
        self.n = 0

    def reset(self):
        self.n += 1

    def step(self, symbol):
        return "x" if self.n % 2 else "y"


class TestTraceCache:
    def test_prefix_lookup(self):
        c = TraceCache()
        c.insert(("a", "b", "a"), ("1", "2", "3"))
        assert c.lookup(("a", "b")) == ("1", "2")
        assert c.lookup(("b",)) is None
        assert c.lookup(()) == ()
        assert c.size == 3

    def test_conflict(self):
        c = TraceCache()
        c.insert(("a",), ("1",))
        with pytest.raises(DeterminismViolation):
            c.insert(("a", "b"), ("2", "0"))

    def test_traces_are_maximal(self):
        c = TraceCache()
        c.insert(("a", "b"), ("1", "2"))
        c.insert(("a",), ("1",))
        c.insert(("b",), ("3",))
        assert sorted(c.traces()) == [(("a", "b"), ("1", "2")), (("b",), ("3",))]

    def test_to_dot(self):
        c = TraceCache()
        c.insert(("a",), ("1",))
        assert "a/1" in c.to_dot()


class TestTeacher:
    def test_experiments_equal_resets(self):
        sul = MealySul(counter())
        t = Teacher(sul)
        for w in [("inc",), ("inc", "peek"), ("inc",), ("peek", "peek")]:
            t.output_query(w)
        t.equivalence_query(counter())
        assert t.experiments == sul.resets
        assert t.cache_hits >= 1

    def test_cache_answers_prefixes(self):
        sul = MealySul(counter())
        t = Teacher(sul)
        t.output_query(("inc", "inc", "peek"))
        assert t.output_query(("inc", "inc")) == ("tick", "tick")
        assert sul.resets == 1

    def test_no_cache(self):
        sul = MealySul(counter())
        t = Teacher(sul, use_cache=False)
        t.output_query(("inc",))
        t.output_query(("inc",))
        assert sul.resets == 2 and t.cache.size == 0

    def test_empty_word_costs_nothing(self):
        sul = MealySul(counter())
        assert Teacher(sul).output_query(()) == ()
        assert sul.resets == 0

    def test_unknown_input(self):
        with pytest.raises(AlphabetError):
            Teacher(MealySul(counter())).output_query(("jump",))

    def test_nondeterministic_sul(self):
        t = Teacher(Flaky())
        t.output_query(("a",))
        with pytest.raises(DeterminismViolation):
            t.execute(("a",))

    def test_step_before_reset(self):
        with pytest.raises(SessionStateError):
            MealySul(counter()).step("inc")

    def test_counterexample_cut_at_first_mismatch(self):
        target = counter(3)
        hyp = counter(2)
        cex = Teacher(MealySul(target)).equivalence_query(hyp)
        assert cex is not None
        got, want = run_mealy(target, cex), run_mealy(hyp, cex)
        assert got[-1] != want[-1] and got[:-1] == want[:-1]

    def test_perfect_oracle(self):
        t = Teacher(MealySul(counter(3)), reference=counter(3))
        assert t.equivalence_query(counter(3)) is None
        assert t.equivalence_query(counter(2)) is not None
        assert t.experiments == 0

    def test_eq_config_validation(self):
        with pytest.raises(ValueError):
            EqConfig(extra_states=-1)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30)
    def test_cache_soundness(self, seed):
        rng = random.Random(seed)
        m = random_mealy(rng, rng.randint(1, 6), rng.randint(1, 3))
        t = Teacher(MealySul(m))
        served = []
        for _ in range(60):
            w = tuple(rng.choice(m.inputs) for _ in range(rng.randint(1, 6)))
            before = t.cache_hits
            out = t.output_query(w)
            if t.cache_hits > before:
                served.append((w, out))
        fresh = MealySul(m)
        for w, out in served[:: max(1, len(served) // max(1, len(served) // 10))]:
            fresh.reset()
            assert tuple(fresh.step(i) for i in w) == out


class TestWMethod:
    def test_characterization_separates_states(self):
        m = counter(4)
        w_set = characterization_set(m)
        sigs = {tuple(run_mealy(m, w, start=q) for w in w_set) for q in range(4)}
        assert len(sigs) == 4

    def test_suite_is_shortlex_and_unique(self):
        suite = w_method_suite(counter(3), 1)
        assert suite == sorted(set(suite), key=lambda w: (len(w), w))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40)
    def test_complete_up_to_extra_states(self, seed):
        rng = random.Random(seed)
        k = rng.randint(2, 3)
        n_h = rng.randint(1, 4)
        hyp = random_minimal_mealy(rng, n_h, k)
        sul = random_minimal_mealy(rng, rng.randint(1, n_h + 2), k)
        suite = w_method_suite(hyp, 2)
        found = any(run_mealy(hyp, w) != run_mealy(sul, w) for w in suite)
        assert found == (not equivalent_mealy(hyp, sul))

import random

import pytest
from hypothesis import given, strategies as st

from midlearn.automata import (
    ActionSignature, InterfaceAutomaton, MealyMachine, behaviour_differences, distinguishing_word,
    isomorphic, mealy_isomorphic, mealy_to_ia, minimize_ia, minimize_mealy,
)
from midlearn.errors import ConstructionError, IncomparableAutomata, MalformedQuery

from oracles import (
    all_words, equivalent_mealy, ia_outputs, is_minimal_mealy, run_mealy, state_signature,
)
from strategies import mealy_machines


def toggle():
    sig = ActionSignature(["press"], ["on", "off"])
    return InterfaceAutomaton(sig, [0, 1, 2, 3], 0,
                              [(0, "press", 1), (1, "on", 2), (2, "press", 3), (3, "off", 0)])


def shuffled(ia, seed):
    perm = list(ia.states)
    random.Random(seed).shuffle(perm)
    m = dict(zip(sorted(ia.states), perm))
    return InterfaceAutomaton(ia.signature, perm, m[ia.initial],
                              [(m[q], a, m[t]) for q, a, t in ia.transitions])


class TestSignature:
    def test_overlap_rejected(self):
        with pytest.raises(ConstructionError):
            ActionSignature(["a"], ["a"])

    def test_empty_rejected(self):
        with pytest.raises(ConstructionError):
            ActionSignature([], [])

    def test_one_sided_allowed(self):
        assert ActionSignature([], ["x"]).inputs == frozenset()

    @pytest.mark.parametrize("bad", ["", "a b", "x\n"])
    def test_bad_symbol(self, bad):
        with pytest.raises(ConstructionError):
            ActionSignature([bad], ["o"])

    def test_label(self):
        sig = ActionSignature(["i"], ["o"])
        assert sig.label("i") == "?i" and sig.label("o") == "!o"


class TestInterfaceAutomaton:
    def test_validation(self):
        sig = ActionSignature(["a"], ["b"])
        with pytest.raises(ConstructionError):
            InterfaceAutomaton(sig, [0], 1, [])
        with pytest.raises(ConstructionError):
            InterfaceAutomaton(sig, [0], 0, [(0, "a", 5)])
        with pytest.raises(ConstructionError):
            InterfaceAutomaton(sig, [0], 0, [(0, "zz", 0)])
        with pytest.raises(ConstructionError):
            InterfaceAutomaton(sig, [], 0, [])

    def test_queries(self):
        ia = toggle()
        assert ia.enabled(1) == {"on"}
        assert ia.observable_out(0) == frozenset()
        assert ia.is_quiescent(0) and not ia.is_quiescent(1)
        assert ia.outgoing(0) == [("press", 1)]
        assert ia.successor(0, "on") is None
        assert ia.is_deterministic()
        assert not ia.is_input_enabled()
        with pytest.raises(MalformedQuery):
            ia.enabled(9)
        with pytest.raises(MalformedQuery):
            ia.next_states(0, "nope")

    def test_run_fragment(self):
        ia = toggle()
        frag = ia.run_fragment(["?press", "!on", "press"])
        assert frag.complete and frag.states == (0, 1, 2, 3) and frag.last == 3
        part = ia.run_fragment(["press", "off"])
        assert part.failed_at == 1 and part.states == (0, 1)
        with pytest.raises(MalformedQuery):
            ia.run_fragment(["!press"])

    def test_names_do_not_affect_identity(self):
        a = toggle()
        b = InterfaceAutomaton(a.signature, a.states, a.initial, a.transitions, {0: "idle"})
        assert a == b and hash(a) == hash(b)

    @given(st.integers(0, 2**32 - 1))
    def test_determinism_matches_brute_force(self, seed):
        rng = random.Random(seed)
        sig = ActionSignature(["a", "b"], ["c"])
        n = rng.randint(1, 5)
        trans = {(rng.randrange(n), rng.choice("abc"), rng.randrange(n)) for _ in range(rng.randint(0, 12))}
        ia = InterfaceAutomaton(sig, range(n), 0, trans)
        brute = all(
            len({t for (p, x, t) in trans if p == q and x == a}) <= 1
            for q in range(n) for a in "abc"
        )
        assert ia.is_deterministic() == brute


class TestMealy:
    def test_incomplete_rejected(self):
        with pytest.raises(ConstructionError):
            MealyMachine(["a", "b"], 1, 0, {(0, "a"): ("x", 0)})

    @given(mealy_machines(max_states=6, max_inputs=3))
    def test_minimize_is_minimal_and_equivalent(self, m):
        mm = minimize_mealy(m)
        assert is_minimal_mealy(mm)
        assert equivalent_mealy(m, mm)

    @given(mealy_machines(max_states=5, max_inputs=2))
    def test_minimize_is_idempotent(self, m):
        mm = minimize_mealy(m)
        assert mealy_isomorphic(mm, minimize_mealy(mm))

    @given(mealy_machines(max_states=5, max_inputs=3), mealy_machines(max_states=5, max_inputs=3))
    def test_distinguishing_word(self, a, b):
        if set(a.inputs) != set(b.inputs):
            with pytest.raises(IncomparableAutomata):
                distinguishing_word(a, b)
            return
        w = distinguishing_word(a, b)
        if w is None:
            assert equivalent_mealy(a, b)
        else:
            assert run_mealy(a, w) != run_mealy(b, w)
            # shortest: no shorter word separates them
            assert all(run_mealy(a, v) == run_mealy(b, v) for v in all_words(a.inputs, len(w) - 1))


class TestTranslation:
    @given(mealy_machines(max_states=5, max_inputs=3), st.integers(0, 10**6))
    def test_ia_reproduces_mealy_outputs(self, m, seed):
        rng = random.Random(seed)
        for minimize in (False, True):
            ia = mealy_to_ia(m, minimize=minimize)
            for _ in range(20):
                w = tuple(rng.choice(m.inputs) for _ in range(rng.randint(0, 8)))
                expect = tuple(None if o == m.quiescence else o for o in run_mealy(m, w))
                assert ia_outputs(ia, w) == expect

    def test_quiescent_step_is_single_input(self):
        m = MealyMachine(["a"], 1, 0, {(0, "a"): ("quiescence", 0)})
        ia = mealy_to_ia(m)
        assert ia.transitions == {(0, "a", 0)} and not ia.signature.outputs

    def test_disabled_step_drops_input(self):
        m = MealyMachine(["a", "b"], 2, 0, {
            (0, "a"): ("x", 1), (0, "b"): ("refused", 0),
            (1, "a"): ("refused", 1), (1, "b"): ("quiescence", 0),
        })
        ia = mealy_to_ia(m)
        assert ia.enabled(ia.initial) == {"a"}
        assert "refused" not in ia.signature.outputs

    def test_disabled_step_must_loop(self):
        m = MealyMachine(["a"], 2, 0, {(0, "a"): ("refused", 1), (1, "a"): ("x", 1)})
        with pytest.raises(ConstructionError):
            mealy_to_ia(m)

    def test_minimize_ia_merges(self):
        sig = ActionSignature(["a"], [])
        ia = InterfaceAutomaton(sig, range(3), 0, [(0, "a", 1), (1, "a", 2), (2, "a", 1)])
        small = minimize_ia(ia)
        assert len(small.states) == 1


class TestIsomorphism:
    def test_relabelled_copy(self):
        a = toggle()
        assert isomorphic(a, shuffled(a, 3)) is not None

    def test_signature_mismatch(self):
        a = toggle()
        b = InterfaceAutomaton(ActionSignature(["press"], ["on"]), [0, 1], 0, [(0, "press", 1), (1, "on", 0)])
        with pytest.raises(IncomparableAutomata):
            isomorphic(a, b)

    @given(mealy_machines(max_states=4, max_inputs=2), st.integers(0, 100), st.integers(0, 100))
    def test_equivalence_relation(self, m, s1, s2):
        a = mealy_to_ia(m)
        b, c = shuffled(a, s1), shuffled(a, s2)
        assert isomorphic(a, a) is not None
        assert (isomorphic(a, b) is None) == (isomorphic(b, a) is None)
        assert isomorphic(a, b) is not None and isomorphic(b, c) is not None
        assert isomorphic(a, c) is not None

    @given(mealy_machines(max_states=4, max_inputs=2), mealy_machines(max_states=4, max_inputs=2))
    def test_agrees_with_behaviour_on_minimal(self, m1, m2):
        if m1.inputs != m2.inputs:
            return
        a, b = mealy_to_ia(m1), mealy_to_ia(m2)
        if a.signature != b.signature:
            return
        same = equivalent_mealy(minimize_mealy(m1), minimize_mealy(m2))
        assert (isomorphic(a, b) is not None) == same
        assert (behaviour_differences(a, b) == []) == same

    def test_mealy_isomorphic_detects_output_change(self):
        m = MealyMachine(["a"], 1, 0, {(0, "a"): ("x", 0)})
        n = MealyMachine(["a"], 1, 0, {(0, "a"): ("y", 0)})
        assert mealy_isomorphic(m, m) and not mealy_isomorphic(m, n)


def test_state_signature_oracle_sanity():
    m = MealyMachine(["a"], 2, 0, {(0, "a"): ("x", 1), (1, "a"): ("y", 0)})
    assert state_signature(m, 0, 2) == (("x", "y"),)

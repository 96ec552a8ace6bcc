"""Reference implementations used only by the tests.

Everything here is deliberately naive and written without the package's
own algorithms, so that agreement means something.
"""

import itertools
from collections import deque

from midlearn.automata import ActionSignature, InterfaceAutomaton, MealyMachine


def all_words(inputs, max_len):
    for n in range(max_len + 1):
        yield from itertools.product(inputs, repeat=n)


def run_mealy(m, word, start=None):
    q = m.initial if start is None else start
    out = []
    for i in word:
        o, q = m.delta[(q, i)]
        out.append(o)
    return tuple(out)


def state_signature(m, q, depth):
    """Outputs of ``q`` on every word of length ``depth``, via one DFS over the word tree."""
    sig = []

    def walk(state, d, acc):
        if d == 0:
            sig.append(acc)
            return
        for i in m.inputs:
            o, t = m.delta[(state, i)]
            walk(t, d - 1, acc + (o,))

    walk(q, depth, ())
    return tuple(sig)


def reachable_mealy(m):
    seen = {m.initial}
    todo = [m.initial]
    while todo:
        q = todo.pop()
        for i in m.inputs:
            t = m.delta[(q, i)][1]
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def is_minimal_mealy(m):
    """All states reachable and pairwise distinguishable by words of length n-1."""
    if len(reachable_mealy(m)) != m.n_states:
        return False
    depth = max(1, m.n_states - 1)
    sigs = [state_signature(m, q, depth) for q in range(m.n_states)]
    return len(set(sigs)) == m.n_states


def equivalent_mealy(a, b, max_len=None):
    """Exhaustive comparison on all words up to the sum of both sizes."""
    n = max_len if max_len is not None else a.n_states + b.n_states
    return state_signature(a, a.initial, n) == state_signature(b, b.initial, n)


def random_mealy(rng, n_states, n_inputs, n_outputs=3, quiescent=True):
    inputs = [f"i{k}" for k in range(n_inputs)]
    outputs = [f"o{k}" for k in range(n_outputs - (1 if quiescent else 0))]
    if quiescent:
        outputs.append("quiescence")
    delta = {}
    # a random spanning tree keeps every state reachable
    for q in range(1, n_states):
        parent = rng.randrange(q)
        free = [i for i in inputs if (parent, i) not in delta]
        while not free:
            parent = rng.randrange(q)
            free = [i for i in inputs if (parent, i) not in delta]
        delta[(parent, rng.choice(free))] = (rng.choice(outputs), q)
    for q in range(n_states):
        for i in inputs:
            if (q, i) not in delta:
                delta[(q, i)] = (rng.choice(outputs), rng.randrange(n_states))
    return MealyMachine(inputs, n_states, 0, delta)


def random_minimal_mealy(rng, n_states, n_inputs, tries=500):
    for _ in range(tries):
        m = random_mealy(rng, n_states, n_inputs)
        if is_minimal_mealy(m):
            return m
    raise RuntimeError("could not draw a minimal machine")


def ia_outputs(ia, word):
    """Drive an expanded IA with inputs and collect the output after each one
    (``None`` when quiescent). Raises KeyError on a refused input."""
    q = ia.initial
    out = []
    for i in word:
        nxt = ia.next_states(q, i)
        if not nxt:
            raise KeyError((len(out), i))
        (q,) = nxt
        outs = sorted(ia.observable_out(q))
        if outs:
            assert len(outs) == 1
            (q,) = ia.next_states(q, outs[0])
            out.append(outs[0])
        else:
            out.append(None)
    return tuple(out)


def widen(ia, signature):
    """Same automaton over a larger signature (extra actions never enabled)."""
    assert ia.signature.inputs <= signature.inputs and ia.signature.outputs <= signature.outputs
    return InterfaceAutomaton(signature, ia.states, ia.initial, ia.transitions, ia.names)


def union_signature(a, b):
    return ActionSignature(a.signature.inputs | b.signature.inputs,
                           a.signature.outputs | b.signature.outputs)


# -- process networks ---------------------------------------------------------


def naive_deadlock(processes):
    """Full breadth-first enumeration of the interleaving semantics.

    Returns (deadlock found, number of reachable states). Built directly from
    transition sets and signatures of ``mcheck.Process`` objects.
    """
    emit, recv = {}, {}
    for k, p in enumerate(processes):
        for a in p.automaton.signature.outputs:
            emit[p.rename.get(a, a)] = k
        for a in p.automaton.signature.inputs:
            recv[p.rename.get(a, a)] = k
    trans = []
    for p in processes:
        rows = {}
        for q, a, t in p.automaton.transitions:
            rows.setdefault(q, []).append((p.rename.get(a, a), t))
        trans.append(rows)

    def succ(s):
        res = set()
        for k in range(len(processes)):
            for g, t in trans[k].get(s[k], []):
                synced = g in emit and g in recv
                if synced and recv[g] == k:
                    continue
                if synced:
                    j = recv[g]
                    for g2, t2 in trans[j].get(s[j], []):
                        if g2 == g:
                            n = list(s)
                            n[k], n[j] = t, t2
                            res.add(tuple(n))
                else:
                    n = list(s)
                    n[k] = t
                    res.add(tuple(n))
        return res

    init = tuple(p.automaton.initial for p in processes)
    seen = {init}
    queue = deque([init])
    dead = False
    while queue:
        s = queue.popleft()
        nxt = succ(s)
        if not nxt and not all(q in p.terminal for q, p in zip(s, processes)):
            dead = True
        for t in nxt:
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return dead, len(seen)


def random_network(rng, n_procs=None, max_states=6, n_actions=None):
    """A random network of deterministic IAs wired through shared action names."""
    from midlearn.mcheck import Process

    n_procs = n_procs or rng.randint(2, 3)
    n_actions = n_actions or rng.randint(2, 6)
    owners = {}
    for a in range(n_actions):
        name = f"a{a}"
        kind = rng.random()
        e = rng.randrange(n_procs)
        if kind < 0.8:
            r = rng.choice([k for k in range(n_procs) if k != e])
            owners[name] = (e, r)
        elif kind < 0.9:
            owners[name] = (e, None)
        else:
            owners[name] = (None, e)
    procs = []
    for k in range(n_procs):
        ins = [a for a, (e, r) in owners.items() if r == k]
        outs = [a for a, (e, r) in owners.items() if e == k]
        if not ins and not outs:
            outs = [f"local{k}"]
        acts = ins + outs
        n = rng.randint(1, max_states)
        trans = set()
        for q in range(n):
            for a in acts:
                if rng.random() < 0.45:
                    trans.add((q, a, rng.randrange(n)))
        terminal = {q for q in range(n) if rng.random() < 0.3}
        ia = InterfaceAutomaton(ActionSignature(ins, outs), range(n), 0, trans)
        procs.append(Process(f"P{k}", ia, terminal=terminal))
    return procs


import random

from hypothesis import strategies as st

from oracles import random_mealy, random_network


@st.composite
def mealy_machines(draw, max_states=6, max_inputs=3):
    n = draw(st.integers(1, max_states))
    k = draw(st.integers(1, max_inputs))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_mealy(random.Random(seed), n, k)


@st.composite
def networks(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_network(random.Random(seed))


words = st.lists(st.sampled_from(["write", "read"]), max_size=30)

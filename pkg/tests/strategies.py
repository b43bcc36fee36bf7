"""Hypothesis strategies for random models."""

from hypothesis import strategies as st

from costcluster.generate import random_model


@st.composite
def models(draw, max_actions=7, max_clusters=4, max_depth=3, flat=False):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(1, max_actions))
    k = draw(st.integers(0, max_clusters))
    return random_model(seed, n_actions=n, n_clusters=k, max_depth=max_depth, flat=flat)


@st.composite
def model_and_permutation(draw, **kw):
    m = draw(models(**kw))
    ids = [a.action_id for a in m.actions]
    return m, tuple(draw(st.permutations(ids)))

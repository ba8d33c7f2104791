import numpy as np
import pytest
from hypothesis import strategies as st

from oxpurify.bellspace import BellWeights


@st.composite
def bell_weights(draw, min_weight: float = 0.0):
    raw = draw(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=4, max_size=4))
    w = np.asarray(raw) + min_weight
    if w.sum() <= 1e-9:
        w = np.ones(4)
    return BellWeights.normalized(w)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

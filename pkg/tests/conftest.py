import numpy as np
import pytest

from helpers import make_hyp


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


@pytest.fixture
def trio_hyps():
    """Three hypotheses already in the common label space {A, B}, with region
    boundaries at t = 0..6. In [2, 3] speaker A is active in all three and B
    in the first two."""
    return [
        make_hyp([("A", 0, 3), ("B", 2, 5)], source_id="h1"),
        make_hyp([("A", 0, 3), ("B", 2, 6)], source_id="h2"),
        make_hyp([("A", 1, 4), ("B", 4, 6)], source_id="h3"),
    ]

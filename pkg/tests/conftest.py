import numpy as np
import pytest

from qviterbi.convcode import CODE_5_7, BscChannel


@pytest.fixture
def code():
    return CODE_5_7


@pytest.fixture
def hmm01(code):
    return code.to_hmm(0.1)


@pytest.fixture
def make_instance(code):
    """Factory for seeded random (message, received, n_blocks) instances."""

    def _make(seed, n_low=2, n_high=10, epsilon=0.1):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(n_low, n_high + 1))
        message = "".join(rng.choice(["0", "1"], n * code.k))
        seed_list = list(seed) if isinstance(seed, (list, tuple)) else [seed]
        channel = BscChannel(epsilon, seed=seed_list + [1])
        received, _flips = channel.transmit(code.encode(message))
        return message, received, n

    return _make

import numpy as np
import pytest

from turboeq.link import BPSK
from turboeq.trellis import ChannelSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def bpsk_spec(taps, noise_variance=1.0):
    return ChannelSpec(np.asarray(taps, dtype=float), noise_variance, 1, BPSK)

import numpy as np
import pytest

from seisrate.model import ChannelMatrix, GatewayState, generate_rayleigh


# K=3, N=2 worked network used throughout: P = N0 = 1 mW
PAPER_H = np.array([
    [3.023, 1.133],
    [1.738, 2.168],
    [0.542, 0.896],
])

SMALL_BUFFER_Q = np.array([0.996, 1.389, 1.669, 1.219, 1.149, 0.652, 0.913, 1.428])
SMALL_BUFFER_G = np.array([1.095, 0.524, 2.220, 0.967, 1.236, 1.480, 1.837, 0.602])

LARGE_BUFFER_Q = np.array([87.12, 13.91, 72.25, 98.11, 35.49, 22.04, 71.68, 91.85])
LARGE_BUFFER_G = np.array([0.610, 1.260, 1.920, 1.280, 0.870, 0.560, 1.810, 1.560])


@pytest.fixture
def paper_channel():
    return ChannelMatrix(3, 2, PAPER_H, 1e-3, 1e-3)


@pytest.fixture
def small_buffer_gateways():
    return GatewayState(8, SMALL_BUFFER_Q, SMALL_BUFFER_G, 1e-3,
                        per_gw_power_cap=1.0)


@pytest.fixture
def large_buffer_gateways():
    return GatewayState(8, LARGE_BUFFER_Q, LARGE_BUFFER_G, 1e-3,
                        total_power_cap=5.0)


def random_channel(num_gps, num_gws, seed):
    return generate_rayleigh(num_gps, num_gws, 1e-3, 1e-3, seed)


def random_gateways(num_gws, seed, cap=None):
    rng = np.random.default_rng(seed)
    q = rng.uniform(0.2, 1.5, num_gws)
    g = rng.rayleigh(1.0, num_gws)
    return GatewayState(num_gws, q, g, 1e-3, per_gw_power_cap=cap)

import numpy as np
import pytest

import reachbound as rb

# Frozen seeded fixtures, chosen so that:
#  - INVERTIBLE certifies on the whole unit square as a single cell,
#  - MIXED has a genuinely sign-varying Jacobian determinant on [-1,1]^2.
INVERTIBLE = dict(seed=25, dims=(2, 5, 2), activation="tanh", scale=0.8)
MIXED = dict(seed=11, dims=(2, 7, 2), activation="tanh", scale=2.0)


def make_net(**kwargs):
    params = dict(INVERTIBLE)
    params.update(kwargs)
    return rb.generate_network(**params)


def identity_net(dim=2):
    return rb.Network(
        (rb.Layer(np.eye(dim), np.zeros(dim), "linear"),)
    )


def linear_net(w, b=None):
    w = np.asarray(w, dtype=float)
    b = np.zeros(w.shape[0]) if b is None else np.asarray(b, dtype=float)
    return rb.Network((rb.Layer(w, b, "linear"),))


def sample_box(box: rb.Box, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lo, hi = box.lo, box.hi
    return lo + rng.random((n, box.dim)) * (hi - lo)


@pytest.fixture
def unit_square():
    return rb.Box.from_bounds([(0, 1), (0, 1)])


@pytest.fixture
def invertible_net():
    return make_net()


@pytest.fixture
def mixed_net():
    return make_net(**MIXED)

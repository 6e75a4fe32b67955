from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from mesovoids import BackgroundField, Ball, LameParams, PointForcePair, generate_cloud

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)
poisson = st.floats(-0.9, 0.49)


def unit_vectors(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@pytest.fixture
def params():
    return LameParams(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def background(params):
    pairs = (
        PointForcePair((3.0, 0.0, 0.0), (1.0, 0.0, 0.0), 0.5, 1.0),
        PointForcePair((0.0, 0.0, -3.0), (0.3, 0.2, 1.0), 0.5, 1.0),
    )
    return BackgroundField(pairs, params)


@pytest.fixture
def small_cloud(params):
    return generate_cloud(Ball((0.0, 0.0, 0.0), 1.0), 5, 0.2, 0.02, 0, params)

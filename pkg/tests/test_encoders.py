"""Joint-velocity estimation from sampled encoder positions."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evimd import (
    ConfigError,
    InsufficientDataError,
    JointVelocityEstimator,
    OrderingError,
    smooth_velocities,
)


def ema_oracle(raw, alpha):
    """Hand-rolled recurrence y[i] = alpha*x[i] + (1-alpha)*y[i-1], y[0]=x[0]."""
    out = np.empty_like(raw)
    out[0] = raw[0]
    for i in range(1, len(raw)):
        out[i] = alpha * raw[i] + (1 - alpha) * out[i - 1]
    return out


def test_ramp_recovers_constant_rate():
    t = np.arange(0, 1_000_000, 10_000)
    pos = 10.0 * t / 1e6  # 10 deg/s ramp
    t_out, v = smooth_velocities(t, pos[:, None], alpha=1.0)
    np.testing.assert_array_equal(t_out, t[1:])
    np.testing.assert_allclose(v[:, 0], 10.0, rtol=1e-12)


def test_constant_position_gives_zero():
    t = np.arange(0, 500_000, 10_000)
    pos = np.full((t.size, 2), 3.7)
    _, v = smooth_velocities(t, pos, alpha=0.5)
    np.testing.assert_array_equal(v, 0.0)


def test_smoothing_matches_hand_recurrence():
    # velocity step: position kinks from flat to a 5 deg/s ramp
    t = np.arange(0, 400_000, 10_000)
    pos = np.where(t < 200_000, 0.0, (t - 200_000) * 5.0 / 1e6)
    raw = np.diff(pos) / np.diff(t / 1e6)
    _, v = smooth_velocities(t, pos[:, None], alpha=0.5)
    np.testing.assert_allclose(v[:, 0], ema_oracle(raw, 0.5), rtol=1e-12, atol=1e-12)
    # smoothing lags the raw step: strictly between old and new level
    k = np.searchsorted(t[1:], 210_000)
    assert 0.0 < v[k, 0] < 5.0


def test_alpha_one_is_raw_differences(rng):
    t = np.sort(rng.choice(np.arange(1, 1_000_000), size=30, replace=False))
    pos = rng.normal(size=(30, 2))
    raw = np.diff(pos, axis=0) / (np.diff(t)[:, None] / 1e6)
    _, v = smooth_velocities(t, pos, alpha=1.0)
    np.testing.assert_allclose(v, raw, rtol=1e-12, atol=1e-12)


def test_irregular_sampling_uses_actual_dt():
    t = np.array([0, 10_000, 40_000])  # 10 ms then 30 ms gaps
    pos = np.array([0.0, 0.1, 0.4])
    _, v = smooth_velocities(t, pos[:, None], alpha=1.0)
    np.testing.assert_allclose(v[:, 0], [10.0, 10.0])


def test_errors():
    with pytest.raises(InsufficientDataError):
        smooth_velocities(np.array([0]), np.array([[1.0]]), alpha=0.5)
    with pytest.raises(OrderingError):
        smooth_velocities(np.array([0, 10, 10]), np.zeros((3, 1)), alpha=0.5)
    with pytest.raises(OrderingError):
        smooth_velocities(np.array([0, 10, 5]), np.zeros((3, 1)), alpha=0.5)
    with pytest.raises(ConfigError):
        smooth_velocities(np.array([0, 10]), np.zeros((2, 1)), alpha=0.0)
    with pytest.raises(ConfigError):
        smooth_velocities(np.array([0, 10]), np.zeros((2, 1)), alpha=1.5)


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(3, 25),
    alpha=st.floats(0.05, 1.0),
    seed=st.integers(0, 2**31),
)
def test_matches_recurrence_oracle_property(n, alpha, seed):
    rng = np.random.default_rng(seed)
    t = np.cumsum(rng.integers(1, 50_000, n))
    pos = rng.normal(scale=10.0, size=(n, 2))
    _, v = smooth_velocities(t, pos, alpha=alpha)
    raw = np.diff(pos, axis=0) / (np.diff(t)[:, None] / 1e6)
    for j in range(2):
        np.testing.assert_allclose(v[:, j], ema_oracle(raw[:, j], alpha), rtol=1e-9, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(alpha=st.floats(0.05, 1.0), seed=st.integers(0, 2**31))
def test_linearity_property(alpha, seed):
    # smoothing is linear: response to (a + b) equals response to a plus b
    rng = np.random.default_rng(seed)
    t = np.cumsum(rng.integers(1, 50_000, 12))
    a = rng.normal(size=(12, 1))
    b = rng.normal(size=(12, 1))
    _, va = smooth_velocities(t, a, alpha=alpha)
    _, vb = smooth_velocities(t, b, alpha=alpha)
    _, vab = smooth_velocities(t, a + b, alpha=alpha)
    np.testing.assert_allclose(vab, va + vb, rtol=1e-9, atol=1e-9)


def test_estimator_transform_shape():
    t = np.arange(0, 100_000, 10_000, dtype=np.float64)
    X = np.column_stack([t, 2.0 * t / 1e6, -1.0 * t / 1e6])
    est = JointVelocityEstimator(alpha=1.0).fit()
    out = est.transform(X)
    assert out.shape == (9, 3)
    np.testing.assert_array_equal(out[:, 0], t[1:])
    np.testing.assert_allclose(out[:, 1], 2.0, rtol=1e-12)
    np.testing.assert_allclose(out[:, 2], -1.0, rtol=1e-12)
    assert JointVelocityEstimator().get_params() == {"alpha": 0.5}
    with pytest.raises(ConfigError):
        JointVelocityEstimator(alpha=2.0).fit()

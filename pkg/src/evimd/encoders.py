"""Joint velocity estimation from sampled encoder positions.

Raw velocities are backward differences of consecutive position samples;
an exponential moving average smooths them. The smoothed series is seeded
with the first raw difference, so output rows start at the second input
timestamp (no velocity exists for the first sample).
"""

from __future__ import annotations

import numpy as np
from scipy.signal import lfilter
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import ConfigError, InsufficientDataError, OrderingError

DEFAULT_ALPHA = 0.5


def smooth_velocities(t_us, positions, alpha=DEFAULT_ALPHA):
    """EMA-smoothed backward-difference velocities.

    Parameters
    ----------
    t_us : (N,) sample times in microseconds, strictly increasing.
    positions : (N, J) joint positions in degrees.
    alpha : smoothing weight on the newest raw difference, in (0, 1].

    Returns
    -------
    (t_out, v) where t_out is t_us[1:] and v is (N-1, J) in degrees/second.
    """
    if not 0.0 < alpha <= 1.0:
        raise ConfigError(f"alpha must be in (0, 1], got {alpha}")
    t = np.asarray(t_us, dtype=np.int64)
    pos = np.atleast_2d(np.asarray(positions, dtype=np.float64))
    if pos.shape[0] != t.shape[0]:
        pos = pos.T
    if pos.shape[0] != t.shape[0]:
        raise ValueError("positions and t_us length mismatch")
    if t.shape[0] < 2:
        raise InsufficientDataError("need at least two samples to difference")
    dt = np.diff(t)
    if dt.min() <= 0:
        bad = int(np.flatnonzero(dt <= 0)[0]) + 1
        raise OrderingError(f"encoder timestamps must strictly increase (sample {bad})")
    raw = np.diff(pos, axis=0) / (dt[:, None] / 1e6)
    # EMA y[i] = alpha*x[i] + (1-alpha)*y[i-1], seeded so y[0] == x[0]
    b, a = [alpha], [1.0, -(1.0 - alpha)]
    zi = (1.0 - alpha) * raw[0]
    smoothed = np.empty_like(raw)
    for j in range(raw.shape[1]):
        smoothed[:, j], _ = lfilter(b, a, raw[:, j], zi=[zi[j]])
    return t[1:], smoothed


class JointVelocityEstimator(TransformerMixin, BaseEstimator):
    """Transform (N, 1+J) [t_us, positions...] into (N-1, 1+J) velocities."""

    def __init__(self, alpha=DEFAULT_ALPHA):
        self.alpha = alpha

    def fit(self, X=None, y=None):
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] < 2:
            raise ValueError("expected (N, 1+J) array of [t_us, positions...]")
        t_out, v = smooth_velocities(X[:, 0].astype(np.int64), X[:, 1:], self.alpha)
        return np.column_stack([t_out.astype(np.float64), v])

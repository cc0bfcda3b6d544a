"""Mahalanobis-distance classification of flow events.

Each flow event's velocity is compared against the flow statistics the model
predicts for the joint velocities in effect at that moment (zero-order hold:
the most recent sample at or before the event). Events whose distance
strictly exceeds the threshold are labelled independent motion; a distance
exactly at the threshold stays ego-motion.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import ConfigError, CoverageError
from .io import DETECTION_DTYPE, FLOW_DTYPE

DEFAULT_THRESHOLD = 4.0

LABEL_EGO = 0
LABEL_INDEPENDENT_MOTION = 1


def mahalanobis(v, stats):
    """sqrt((v - mu)^T cov^-1 (v - mu)) for one velocity against FlowStatistics."""
    d = np.asarray(v, dtype=np.float64) - stats.mu
    if not np.isfinite(d).all():
        raise ValueError("non-finite velocity or mean")
    sol = np.linalg.solve(stats.cov, d)
    return float(np.sqrt(d @ sol))


def _distances(velocities, stats):
    """Vectorized Mahalanobis distances of (k, 2) velocities against one stats."""
    d = velocities - stats.mu[None, :]
    sol = np.linalg.solve(stats.cov, d.T)
    return np.sqrt(np.einsum("ij,ji->i", d, sol))


def classify_stream(flow, model, velocity_samples, threshold=DEFAULT_THRESHOLD):
    """Label every flow event against model predictions under zero-order hold.

    Parameters
    ----------
    flow : flow-event array, time-ordered.
    model : fitted EgoMotionRegressor.
    velocity_samples : (N, 1+J) array of [t_us, joint velocities...], sorted.
    threshold : distance above which (strictly) an event is independent.

    Returns
    -------
    Detection array (DETECTION_DTYPE): the flow fields plus the Mahalanobis
    distance, the predicted label (0 ego, 1 independent) and the ground-truth
    label carried over from the flow stream. Order is preserved.
    """
    if threshold <= 0:
        raise ConfigError(f"threshold must be > 0, got {threshold}")
    flow = np.asarray(flow, dtype=FLOW_DTYPE)
    samples = np.asarray(velocity_samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] < 2:
        raise ValueError("velocity_samples must be (N, 1+J)")

    out = np.zeros(flow.shape[0], dtype=DETECTION_DTYPE)
    for name in ("t", "x", "y", "polarity", "cluster_id", "vx", "vy"):
        out[name] = flow[name]
    out["gt_label"] = flow["label"]
    if flow.shape[0] == 0:
        return out

    vt = samples[:, 0]
    idx = np.searchsorted(vt, flow["t"].astype(np.float64), side="right") - 1
    if idx.min() < 0:
        n = int((idx < 0).sum())
        raise CoverageError(
            f"{n} flow events precede the first joint-velocity sample at {vt[0]:.0f} us"
        )

    v = np.column_stack([flow["vx"].astype(np.float64), flow["vy"].astype(np.float64)])
    distances = np.empty(flow.shape[0], dtype=np.float64)
    uniq, inverse = np.unique(idx, return_inverse=True)
    stats_list = model.predict_stats(samples[uniq, 1:])
    for u, stats in enumerate(stats_list):
        sel = inverse == u
        distances[sel] = _distances(v[sel], stats)
    out["distance"] = distances
    out["label"] = np.where(distances > threshold, LABEL_INDEPENDENT_MOTION, LABEL_EGO)
    return out


class IndependentMotionClassifier(BaseEstimator):
    """Estimator wrapper around classify_stream.

    Parameters
    ----------
    model : fitted EgoMotionRegressor (or None, set before classify()).
    threshold : strict decision boundary on the Mahalanobis distance.
    """

    def __init__(self, model=None, threshold=DEFAULT_THRESHOLD):
        self.model = model
        self.threshold = threshold

    def fit(self, X=None, y=None):
        if self.threshold <= 0:
            raise ConfigError(f"threshold must be > 0, got {self.threshold}")
        return self

    def classify(self, flow, velocity_samples):
        if self.model is None:
            raise ConfigError("no model set; pass model= or assign .model first")
        return classify_stream(flow, self.model, velocity_samples, self.threshold)

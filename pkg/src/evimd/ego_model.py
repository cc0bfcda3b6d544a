"""Learning the mapping from joint velocities to expected image-flow statistics.

Training pairs are built by replaying a flow-event stream against sampled
joint velocities: at each velocity sample time, if enough clusters are
actively emitting flow, the mean and unbiased covariance of their current
velocities become the regression target for that sample's joint velocity.

The regressor itself is RBF-kernel ridge regression solved in closed form,
one shared kernel for five scalar targets (mu_vx, mu_vy, s_vx, s_vxvy, s_vy),
with z-scored inputs and a median-pairwise-distance bandwidth heuristic.
Models serialize to a self-describing JSON file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.spatial.distance import pdist
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigError, InsufficientDataError
from .io import FLOW_DTYPE

MODEL_VERSION = 1
TARGET_NAMES = ("mu_vx", "mu_vy", "s_vx", "s_vxvy", "s_vy")

DEFAULT_MIN_CLUSTERS = 5
DEFAULT_LAMBDA = 1e-3
DEFAULT_EPSILON = 1e-6
DEFAULT_REFRESH_US = 1_000_000


@dataclass
class FlowStatistics:
    """First and second moments of cluster image velocities, in px/s."""

    mu: np.ndarray  # (2,)
    cov: np.ndarray  # (2, 2) symmetric

    def as_targets(self):
        return np.array(
            [self.mu[0], self.mu[1], self.cov[0, 0], self.cov[0, 1], self.cov[1, 1]]
        )


class FlowStreamState:
    """Replay cursor over a flow stream tracking each cluster's latest velocity.

    A cluster is "active" at time t if it emitted a flow event within the
    refresh window ending at t. Only clusters visible in the flow stream are
    known here: emission already implies the tracker's membership minimum, so
    every active cluster counts as qualifying.
    """

    def __init__(self, flow, refresh_us=DEFAULT_REFRESH_US):
        self._flow = np.asarray(flow, dtype=FLOW_DTYPE)
        self._refresh_us = int(refresh_us)
        self._pos = 0
        self._state = {}  # cluster_id -> (last_t, vx, vy)

    def advance(self, t_us):
        """Consume all flow events with timestamp <= t_us."""
        flow = self._flow
        i = self._pos
        n = flow.shape[0]
        state = self._state
        while i < n and flow["t"][i] <= t_us:
            r = flow[i]
            state[int(r["cluster_id"])] = (int(r["t"]), float(r["vx"]), float(r["vy"]))
            i += 1
        self._pos = i

    def active_velocities(self, t_us):
        """(k, 2) velocities of clusters active at t_us, ordered by cluster id."""
        horizon = int(t_us) - self._refresh_us
        rows = [
            (cid, vx, vy)
            for cid, (last_t, vx, vy) in self._state.items()
            if last_t >= horizon
        ]
        rows.sort()
        return np.array([(vx, vy) for _, vx, vy in rows], dtype=np.float64).reshape(-1, 2)


def flow_statistics(velocities):
    """Mean and unbiased covariance of (k, 2) cluster velocities, k >= 2."""
    v = np.asarray(velocities, dtype=np.float64)
    mu = v.mean(axis=0)
    d = v - mu
    cov = (d.T @ d) / (v.shape[0] - 1)
    return FlowStatistics(mu=mu, cov=cov)


def collect_examples(
    flow,
    velocity_samples,
    min_clusters=DEFAULT_MIN_CLUSTERS,
    refresh_us=DEFAULT_REFRESH_US,
):
    """Pair joint-velocity samples with concurrent flow statistics.

    Parameters
    ----------
    flow : flow-event array, time-ordered.
    velocity_samples : (N, 1+J) array of [t_us, joint velocities...].
    min_clusters : minimum simultaneously active clusters for an instant to
        contribute an example (must be >= 2 so covariance is defined).
    refresh_us : activity window; a cluster is active while its last flow
        event is at most this old.

    Returns
    -------
    (X, Y): X (K, J) joint velocities, Y (K, 5) flow statistics targets in
    TARGET_NAMES order. Instants without enough active clusters are skipped.
    """
    if min_clusters < 2:
        raise ConfigError(f"min_clusters must be >= 2, got {min_clusters}")
    flow = np.asarray(flow, dtype=FLOW_DTYPE)
    samples = np.asarray(velocity_samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] < 2:
        raise ValueError("velocity_samples must be (N, 1+J)")
    if flow.shape[0] == 0 or samples.shape[0] == 0:
        raise InsufficientDataError("flow and joint-velocity streams do not overlap")
    # flow events stay active for refresh_us, so extend the flow interval
    if (
        int(flow["t"][-1]) + int(refresh_us) < int(samples[0, 0])
        or int(flow["t"][0]) > int(samples[-1, 0])
    ):
        raise InsufficientDataError("flow and joint-velocity streams do not overlap")

    state = FlowStreamState(flow, refresh_us=refresh_us)
    xs = []
    ys = []
    for row in samples:
        t = int(row[0])
        state.advance(t)
        v = state.active_velocities(t)
        # every visible cluster qualifies, so the half-of-active rule is
        # already satisfied and only the absolute minimum remains
        if v.shape[0] < min_clusters:
            continue
        stats = flow_statistics(v)
        xs.append(row[1:])
        ys.append(stats.as_targets())
    if xs:
        return np.asarray(xs), np.asarray(ys)
    j = samples.shape[1] - 1
    return np.empty((0, j)), np.empty((0, 5))


def median_bandwidth(x):
    """gamma = 1 / (2 * median pairwise distance^2); 1.0 for degenerate sets."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(x)))
    if med == 0.0:
        return 1.0
    return 1.0 / (2.0 * med * med)


def _rbf_kernel(a, b, gamma):
    aa = np.sum(a * a, axis=1)[:, None]
    bb = np.sum(b * b, axis=1)[None, :]
    sq = np.maximum(aa + bb - 2.0 * (a @ b.T), 0.0)
    return np.exp(-gamma * sq)


class EgoMotionRegressor(RegressorMixin, BaseEstimator):
    """Five-target RBF kernel ridge regression with z-scored inputs.

    All targets share the kernel matrix and its Cholesky factorization:
    targets are mean-centered and the dual weights alpha = (K + lambda*I)^-1
    (Y - Ybar) are solved once for the five residual columns; predictions add
    the target means back. The intercept makes constant targets reproduce
    exactly instead of being shrunk by the ridge. gamma="median" resolves the
    bandwidth from the median pairwise distance of the normalized training
    inputs at fit time.
    """

    def __init__(self, gamma="median", lam=DEFAULT_LAMBDA, epsilon=DEFAULT_EPSILON):
        self.gamma = gamma
        self.lam = lam
        self.epsilon = epsilon

    def _validate(self):
        if not (isinstance(self.gamma, str) and self.gamma == "median"):
            if not np.isreal(self.gamma) or float(self.gamma) <= 0:
                raise ConfigError(f"gamma must be 'median' or > 0, got {self.gamma!r}")
        if self.lam <= 0:
            raise ConfigError(f"lam must be > 0, got {self.lam}")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")

    def fit(self, X, y):
        self._validate()
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2:
            raise ValueError("X must be (K, J)")
        if Y.ndim != 2 or Y.shape[1] != len(TARGET_NAMES):
            raise ValueError(f"y must be (K, {len(TARGET_NAMES)})")
        if X.shape[0] != Y.shape[0]:
            raise ValueError("X and y row counts differ")
        if X.shape[0] < 1:
            raise InsufficientDataError("need at least 1 training example")
        if not (np.isfinite(X).all() and np.isfinite(Y).all()):
            raise ValueError("training data must be finite")

        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0.0] = 1.0
        self.scale_ = scale
        xn = (X - self.mean_) / self.scale_
        self.gamma_ = (
            median_bandwidth(xn) if isinstance(self.gamma, str) else float(self.gamma)
        )
        self.intercept_ = Y.mean(axis=0)
        k = _rbf_kernel(xn, xn, self.gamma_)
        k[np.diag_indices_from(k)] += float(self.lam)
        self.dual_ = cho_solve(cho_factor(k, lower=True), Y - self.intercept_)
        self.support_ = xn
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        """Raw (n, 5) regressor outputs in TARGET_NAMES order."""
        check_is_fitted(self, "dual_")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} input features, got {X.shape[1]}"
            )
        xn = (X - self.mean_) / self.scale_
        return _rbf_kernel(xn, self.support_, self.gamma_) @ self.dual_ + self.intercept_

    def predict_stats(self, X):
        """FlowStatistics per query, covariance repaired to be positive definite.

        The raw (s_vx, s_vxvy, s_vy) outputs form a symmetric 2x2 matrix
        whose eigenvalues are clipped at zero before the epsilon ridge is
        added, so the result is positive definite for any regressor output.
        """
        raw = self.predict(X)
        out = []
        eps = float(self.epsilon)
        for row in raw:
            cov = np.array([[row[2], row[3]], [row[3], row[4]]])
            cov = (cov + cov.T) / 2.0
            vals, vecs = np.linalg.eigh(cov)
            cov = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
            cov = (cov + cov.T) / 2.0 + eps * np.eye(2)
            out.append(FlowStatistics(mu=row[:2].copy(), cov=cov))
        return out

    def to_dict(self):
        check_is_fitted(self, "dual_")
        w = {name: self.dual_[:, i].tolist() for i, name in enumerate(TARGET_NAMES)}
        b = {name: float(self.intercept_[i]) for i, name in enumerate(TARGET_NAMES)}
        return {
            "version": MODEL_VERSION,
            "J": int(self.n_features_in_),
            "gamma": float(self.gamma_),
            "lambda": float(self.lam),
            "epsilon": float(self.epsilon),
            "normalization": {
                "mean": self.mean_.tolist(),
                "scale": self.scale_.tolist(),
            },
            "support": self.support_.tolist(),
            "weights": w,
            "intercept": b,
        }

    @classmethod
    def from_dict(cls, d):
        try:
            version = d["version"]
            if version != MODEL_VERSION:
                raise ConfigError(f"unsupported model version {version}")
            j = int(d["J"])
            model = cls(gamma=float(d["gamma"]), lam=float(d["lambda"]), epsilon=float(d["epsilon"]))
            model.gamma_ = float(d["gamma"])
            model.mean_ = np.asarray(d["normalization"]["mean"], dtype=np.float64)
            model.scale_ = np.asarray(d["normalization"]["scale"], dtype=np.float64)
            model.support_ = np.asarray(d["support"], dtype=np.float64).reshape(-1, j)
            model.dual_ = np.column_stack(
                [np.asarray(d["weights"][name], dtype=np.float64) for name in TARGET_NAMES]
            )
            # files written without intercepts load as zero-intercept models
            b = d.get("intercept", {})
            model.intercept_ = np.array(
                [float(b.get(name, 0.0)) for name in TARGET_NAMES]
            )
            model.n_features_in_ = j
        except KeyError as exc:
            raise ConfigError(f"model file missing field {exc}") from exc
        if model.mean_.shape != (j,) or model.scale_.shape != (j,):
            raise ConfigError("normalization vectors do not match J")
        if model.dual_.shape[0] != model.support_.shape[0]:
            raise ConfigError("weights and support lengths differ")
        return model

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def train_model(
    flow,
    velocity_samples,
    min_clusters=DEFAULT_MIN_CLUSTERS,
    refresh_us=DEFAULT_REFRESH_US,
    gamma="median",
    lam=DEFAULT_LAMBDA,
    epsilon=DEFAULT_EPSILON,
):
    """collect_examples + fit in one call; raises if too few instants qualify."""
    X, Y = collect_examples(
        flow, velocity_samples, min_clusters=min_clusters, refresh_us=refresh_us
    )
    if X.shape[0] < 2:
        raise InsufficientDataError(
            f"only {X.shape[0]} training instants qualified; need at least 2"
        )
    return EgoMotionRegressor(gamma=gamma, lam=lam, epsilon=epsilon).fit(X, Y)

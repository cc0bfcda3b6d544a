"""Greedy clustering of corner events into tracks with velocity estimates.

Corner events are assigned to the nearest existing cluster within a distance
bound, clusters hold a bounded FIFO of member events, stale clusters expire,
and once a cluster has enough members each new assignment emits a flow event
carrying the cluster's current image velocity. Velocity is the slope pair of
two independent least-squares line fits x(t), y(t) over the member events.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .events import EVENT_DTYPE, US_PER_S
from .exceptions import ConfigError, DegenerateFitError
from .io import FLOW_DTYPE

DEFAULT_DISTANCE = 5.0
DEFAULT_CAPACITY = 50
DEFAULT_MIN_EVENTS = 15
DEFAULT_REFRESH_US = US_PER_S


def fit_velocity(t_us, x, y):
    """Slopes of independent OLS line fits x(t) and y(t), in pixels/second.

    Times are centered before fitting so microsecond magnitudes never enter
    the normal equations. Raises DegenerateFitError when every timestamp is
    identical (slope undefined).
    """
    t = np.asarray(t_us, dtype=np.float64) / US_PER_S
    t = t - t.mean()
    denom = float(t @ t)
    if denom == 0.0:
        raise DegenerateFitError("all member timestamps identical; velocity undefined")
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    vx = float(t @ (xs - xs.mean())) / denom
    vy = float(t @ (ys - ys.mean())) / denom
    return vx, vy


class _Cluster:
    __slots__ = ("cid", "t", "x", "y", "last_update", "vx", "vy")

    def __init__(self, cid, t, x, y):
        self.cid = cid
        self.t = [t]
        self.x = [x]
        self.y = [y]
        self.last_update = t
        self.vx = None
        self.vy = None

    def append(self, t, x, y, capacity):
        self.t.append(t)
        self.x.append(x)
        self.y.append(y)
        if len(self.t) > capacity:
            del self.t[0], self.x[0], self.y[0]
        self.last_update = t

    def centroid(self):
        n = len(self.x)
        return sum(self.x) / n, sum(self.y) / n


class ClusterTracker:
    """Incremental tracker; feed events oldest-first via step().

    Per event: pick the nearest cluster whose anchor lies within `distance`
    (inclusive; ties break toward the lowest cluster id) or open a new one,
    append the event (evicting the oldest member past `capacity`), drop every
    cluster idle for more than `refresh_us`, and, once the touched cluster
    has at least `min_events` members, emit its refitted velocity.

    The anchor is the cluster's most recent member by default; set
    anchor="centroid" to measure against the member average instead.
    """

    def __init__(
        self,
        distance=DEFAULT_DISTANCE,
        capacity=DEFAULT_CAPACITY,
        min_events=DEFAULT_MIN_EVENTS,
        refresh_us=DEFAULT_REFRESH_US,
        anchor="latest",
    ):
        if distance <= 0:
            raise ConfigError(f"distance must be > 0, got {distance}")
        if min_events < 3:
            raise ConfigError(f"min_events must be >= 3, got {min_events}")
        if capacity < min_events:
            raise ConfigError(
                f"capacity ({capacity}) must be >= min_events ({min_events})"
            )
        if refresh_us <= 0:
            raise ConfigError(f"refresh_us must be > 0, got {refresh_us}")
        if anchor not in ("latest", "centroid"):
            raise ConfigError(f"anchor must be 'latest' or 'centroid', got {anchor!r}")
        self.distance = float(distance)
        self.capacity = int(capacity)
        self.min_events = int(min_events)
        self.refresh_us = int(refresh_us)
        self.anchor = anchor
        self.clusters = {}
        self._next_id = 0

    def _nearest(self, x, y):
        best = None
        best_d = self.distance
        use_centroid = self.anchor == "centroid"
        for cid in sorted(self.clusters):
            c = self.clusters[cid]
            if use_centroid:
                ax, ay = c.centroid()
            else:
                ax, ay = c.x[-1], c.y[-1]
            d = math.hypot(x - ax, y - ay)
            if d < best_d or (best is None and d == best_d):
                best = c
                best_d = d
        return best

    def step(self, t, x, y):
        """Ingest one corner event; return (cluster_id, vx, vy) or None.

        A tuple is returned only when the event's cluster currently holds at
        least `min_events` members and has a defined velocity.
        """
        t = int(t)
        x = float(x)
        y = float(y)
        cluster = self._nearest(x, y)
        if cluster is None:
            cluster = _Cluster(self._next_id, t, x, y)
            self.clusters[cluster.cid] = cluster
            self._next_id += 1
        else:
            cluster.append(t, x, y, self.capacity)

        horizon = t - self.refresh_us
        stale = [cid for cid, c in self.clusters.items() if c.last_update < horizon]
        for cid in stale:
            del self.clusters[cid]

        if len(cluster.t) < self.min_events:
            return None
        try:
            cluster.vx, cluster.vy = fit_velocity(cluster.t, cluster.x, cluster.y)
        except DegenerateFitError:
            pass  # keep the previous estimate, if any
        if cluster.vx is None:
            return None
        return cluster.cid, cluster.vx, cluster.vy

    def active_ids(self):
        return sorted(self.clusters)


class FlowTracker(TransformerMixin, BaseEstimator):
    """Stream transformer turning corner events into flow events.

    transform() replays the corner stream through a fresh ClusterTracker, so
    identical inputs always give identical outputs. Emitted velocities are
    stored at float32 like the on-disk flow record, keeping in-memory and
    round-tripped pipelines bit-identical.
    """

    def __init__(
        self,
        distance=DEFAULT_DISTANCE,
        capacity=DEFAULT_CAPACITY,
        min_events=DEFAULT_MIN_EVENTS,
        refresh_us=DEFAULT_REFRESH_US,
        anchor="latest",
    ):
        self.distance = distance
        self.capacity = capacity
        self.min_events = min_events
        self.refresh_us = refresh_us
        self.anchor = anchor

    def _tracker(self):
        return ClusterTracker(
            distance=self.distance,
            capacity=self.capacity,
            min_events=self.min_events,
            refresh_us=self.refresh_us,
            anchor=self.anchor,
        )

    def fit(self, X=None, y=None):
        self._tracker()  # parameter validation
        return self

    def transform(self, X):
        corners = np.asarray(X, dtype=EVENT_DTYPE)
        tracker = self._tracker()
        step = tracker.step
        rows = []
        for e in corners:
            emitted = step(e["t"], e["x"], e["y"])
            if emitted is not None:
                rows.append((e, emitted))
        out = np.zeros(len(rows), dtype=FLOW_DTYPE)
        for i, (e, (cid, vx, vy)) in enumerate(rows):
            r = out[i]
            r["t"] = e["t"]
            r["x"] = e["x"]
            r["y"] = e["y"]
            r["polarity"] = e["polarity"]
            r["label"] = e["label"]
            r["cluster_id"] = cid
            r["vx"] = vx
            r["vy"] = vy
        return out

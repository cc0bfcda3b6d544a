"""Event data model and per-pixel local event surfaces.

An event stream is a numpy structured array with fields ``t`` (microseconds,
uint64), ``x``/``y`` (pixel coordinates, uint16), ``polarity`` (0=OFF, 1=ON)
and ``label`` (ground-truth / classifier label, see ``LABEL_*`` constants).
Timestamps must be non-decreasing within a stream; duplicates are allowed
since event cameras emit bursts within one clock tick.
"""

from __future__ import annotations

import numpy as np

from .exceptions import BoundsError, OrderingError

EVENT_DTYPE = np.dtype(
    [
        ("t", "<u8"),
        ("x", "<u2"),
        ("y", "<u2"),
        ("polarity", "u1"),
        ("label", "u1"),
    ]
)

LABEL_UNKNOWN = 0
LABEL_BACKGROUND = 1
LABEL_INDEPENDENT = 2

US_PER_S = 1_000_000


def make_events(t, x, y, polarity, label=None):
    """Assemble a structured event array from per-field sequences."""
    t = np.asarray(t, dtype=np.uint64)
    out = np.zeros(t.shape[0], dtype=EVENT_DTYPE)
    out["t"] = t
    out["x"] = np.asarray(x, dtype=np.uint16)
    out["y"] = np.asarray(y, dtype=np.uint16)
    out["polarity"] = np.asarray(polarity, dtype=np.uint8)
    if label is not None:
        out["label"] = np.asarray(label, dtype=np.uint8)
    return out


def check_event_stream(events, sensor_size):
    """Validate bounds and timestamp ordering of a whole stream at once.

    Raises BoundsError / OrderingError on the first violation; returns the
    array unchanged otherwise.
    """
    if events.dtype != EVENT_DTYPE:
        raise TypeError(f"expected EVENT_DTYPE array, got {events.dtype}")
    if events.shape[0] == 0:
        return events
    width, height = sensor_size
    if int(events["x"].max(initial=0)) >= width or int(events["y"].max(initial=0)) >= height:
        bad = np.flatnonzero((events["x"] >= width) | (events["y"] >= height))[0]
        e = events[bad]
        raise BoundsError(
            f"event {bad} at ({e['x']}, {e['y']}) outside {width}x{height} sensor"
        )
    dt = np.diff(events["t"].astype(np.int64))
    if dt.size and dt.min() < 0:
        bad = int(np.flatnonzero(dt < 0)[0]) + 1
        raise OrderingError(f"timestamp regression at record {bad}")
    return events


class LocalSurface:
    """Per-pixel FIFO windows of recent nearby events, split by polarity.

    Every pixel owns one queue per polarity holding the most recent
    ``2 * radius`` events that occurred inside the (2l+1)x(2l+1) neighborhood
    centered on it. Insertion fans an event out to all neighborhood queues;
    eviction is strictly oldest-first. ``patch`` renders one queue as a
    binary occupancy grid for feature detection.

    Queues are stored as fixed-capacity ring buffers of packed event
    coordinates (occupancy queries never need timestamps), so an update
    touches at most (2l+1)^2 slots and memory stays bounded at
    width*height*2*(2l) entries. Each pixel keeps a monotone insert counter;
    ring head and fill level are derived from it on read, which keeps the
    per-event write down to one fancy store and one in-place add.
    """

    def __init__(self, sensor_size, radius=5):
        if radius < 1:
            raise ValueError("radius must be >= 1")
        self.width, self.height = int(sensor_size[0]), int(sensor_size[1])
        self.radius = int(radius)
        self.window_capacity = 2 * self.radius
        cap = self.window_capacity
        # packed coordinate (y << 16) | x per slot
        self._q = np.zeros((2, self.height, self.width, cap), dtype=np.uint32)
        self._total = np.zeros((2, self.height, self.width), dtype=np.int64)
        self._last_t = 0
        self._empty = True

    @property
    def last_timestamp(self):
        return None if self._empty else self._last_t

    def update(self, x, y, polarity, t):
        """Insert one event, fanning it out to all neighborhood queues.

        The event must lie in-bounds and must not precede the previously
        inserted event.
        """
        x = int(x)
        y = int(y)
        t = int(t)
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise BoundsError(f"event at ({x}, {y}) outside {self.width}x{self.height} sensor")
        if not self._empty and t < self._last_t:
            raise OrderingError(f"timestamp regression: {t} < {self._last_t}")
        self._last_t = t
        self._empty = False

        l = self.radius
        p = int(polarity) & 1
        y0, y1 = max(0, y - l), min(self.height, y + l + 1)
        x0, x1 = max(0, x - l), min(self.width, x + l + 1)
        tot = self._total[p, y0:y1, x0:x1]
        self._q[
            p,
            np.arange(y0, y1)[:, None],
            np.arange(x0, x1)[None, :],
            tot % self.window_capacity,
        ] = (y << 16) | x
        tot += 1

    def _packed(self, p, y, x):
        """Current queue slots at one pixel, packed, in arbitrary order."""
        k = self._total[p, y, x]
        cap = self.window_capacity
        return self._q[p, y, x, : (k if k < cap else cap)]

    def patch(self, x, y, polarity, out=None):
        """Binary occupancy of the queue at (x, y) over its neighborhood.

        Cell [l + ey - y, l + ex - x] is 1 iff some queued event of the
        requested polarity sits at (ex, ey); the center cell maps to (x, y).
        """
        x = int(x)
        y = int(y)
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise BoundsError(f"patch center ({x}, {y}) outside sensor")
        l = self.radius
        side = 2 * l + 1
        if out is None:
            out = np.zeros((side, side), dtype=np.float64)
        else:
            out[:] = 0.0
        packed = self._packed(int(polarity) & 1, y, x).astype(np.int64)
        if packed.size:
            out[(packed >> 16) - y + l, (packed & 0xFFFF) - x + l] = 1.0
        return out

    def queue_coords(self, x, y, polarity):
        """Coordinates currently queued at (x, y), oldest first."""
        p = int(polarity) & 1
        x = int(x)
        y = int(y)
        tot = int(self._total[p, y, x])
        cap = self.window_capacity
        q = self._q[p, y, x]
        if tot == 0:
            packed = q[:0]
        elif tot <= cap:
            packed = q[:tot]
        else:
            h = tot % cap
            packed = np.concatenate([q[h:], q[:h]])
        packed = packed.astype(np.int64)
        return np.stack([packed & 0xFFFF, packed >> 16], axis=-1)


def surface_update(surface, event):
    """Functional wrapper over LocalSurface.update for structured rows."""
    surface.update(event["x"], event["y"], event["polarity"], event["t"])
    return surface


def surface_patch(surface, x, y, polarity):
    return surface.patch(x, y, polarity)

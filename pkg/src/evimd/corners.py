"""Harris corner classification of events on binary local surfaces.

Each incoming event is scored by applying a Harris response to the binary
occupancy patch of its own pixel's event queue: Sobel gradients over the
patch, Gaussian-weighted second-moment matrix M, then
``R = det(M) - k * trace(M)^2``. Events with ``R >= threshold`` are corner
events; everything else is dropped (a normal outcome, not an error).

Kernel scaling is calibrated so that with the default threshold of 8 a
reference L-shaped patch (two perpendicular half-arms meeting at the center)
scores several times above threshold, while isolated events, event pairs,
and the straight thin lines a sweeping edge leaves in an event queue (full
or partial, axis-aligned or diagonal) all stay below it. The calibration is
frozen here and pinned by tests.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .events import EVENT_DTYPE, LocalSurface, check_event_stream
from .exceptions import ConfigError

# Per-size (smoothing, derivative, divisor) Sobel factorizations. The divisor
# is a frozen calibration constant: with the default threshold of 8, junction
# patches (two half-arms meeting at the center, the per-polarity signature of
# a texture corner under motion) score well above threshold (reference L is
# ~6x), while the line states a clean sweeping edge leaves in a queue -- full
# and partial straight lines through the center, at any orientation -- stay
# below it.
_SOBEL = {
    5: (np.array([1.0, 4.0, 6.0, 4.0, 1.0]), np.array([-1.0, -2.0, 0.0, 2.0, 1.0]), 4.6),
    3: (np.array([1.0, 2.0, 1.0]), np.array([-1.0, 0.0, 1.0]), 0.575),
}

DEFAULT_RADIUS = 5
DEFAULT_HARRIS_K = 0.04
DEFAULT_THRESHOLD = 8.0


def sobel_kernels(size=5):
    """The (Gx, Gy) kernels used for patch gradients, normalization included."""
    if size not in _SOBEL:
        raise ConfigError(f"sobel_size must be one of {sorted(_SOBEL)}, got {size}")
    smooth, deriv, divisor = _SOBEL[size]
    gx = np.outer(smooth, deriv) / divisor
    return gx, gx.T.copy()


def gaussian_window(radius, sigma):
    """Normalized Gaussian weights over a (2r+1)^2 patch, centered."""
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(ax[None, :] ** 2 + ax[:, None] ** 2) / (2.0 * sigma**2))
    return g / g.sum()


def _conv_matrix_1d(kernel, size):
    """Matrix form of 1-D zero-padded 'same' convolution with `kernel`."""
    m = np.zeros((size, size))
    basis = np.zeros(size)
    for c in range(size):
        basis[c] = 1.0
        m[:, c] = np.convolve(basis, kernel, mode="same")
        basis[c] = 0.0
    return m


def _conv_same(patch, kernel):
    kh, kw = kernel.shape
    ph, pw = kh // 2, kw // 2
    padded = np.pad(patch, ((ph, ph), (pw, pw)))
    flipped = kernel[::-1, ::-1]
    out = np.empty_like(patch, dtype=np.float64)
    for i in range(patch.shape[0]):
        for j in range(patch.shape[1]):
            out[i, j] = np.sum(padded[i : i + kh, j : j + kw] * flipped)
    return out


def harris_response(patch, harris_k=DEFAULT_HARRIS_K, gaussian_sigma=None, sobel_size=5):
    """Harris score of one binary patch (same-size zero-padded convolution)."""
    patch = np.asarray(patch, dtype=np.float64)
    radius = patch.shape[0] // 2
    if gaussian_sigma is None:
        gaussian_sigma = radius / 2.0
    gx, gy = sobel_kernels(sobel_size)
    ix = _conv_same(patch, gx)
    iy = _conv_same(patch, gy)
    w = gaussian_window(radius, gaussian_sigma)
    m11 = float(np.sum(w * ix * ix))
    m22 = float(np.sum(w * iy * iy))
    m12 = float(np.sum(w * ix * iy))
    return m11 * m22 - m12 * m12 - harris_k * (m11 + m22) ** 2


class _PatchScorer:
    """Precomputed linear operators for fast per-event Harris scoring.

    For an occupancy vector p (flattened patch), Ix = Gx_op @ p where column
    c of Gx_op is the zero-padded 'same' convolution response to cell c.
    Scoring a set of occupied cells is then two small matvecs; duplicate cell
    indices are harmless because occupancy is written, not accumulated.
    """

    def __init__(self, radius, harris_k, gaussian_sigma, sobel_size):
        side = 2 * radius + 1
        if sobel_size not in _SOBEL:
            raise ConfigError(f"sobel_size must be one of {sorted(_SOBEL)}, got {sobel_size}")
        smooth, deriv, divisor = _SOBEL[sobel_size]
        # separable kernels: the 2-D 'same' operator on row-major flattening
        # is the Kronecker product of the 1-D column and row operators
        cs = _conv_matrix_1d(smooth, side)
        cd = _conv_matrix_1d(deriv, side)
        self._gx_op = np.kron(cs, cd) / divisor
        self._gy_op = np.kron(cd, cs) / divisor
        self._w = gaussian_window(radius, gaussian_sigma).ravel()
        self._k = harris_k
        self._p = np.zeros(side * side)
        self.side = side

    def score_cells(self, cells):
        """Harris response for the patch occupying `cells` (repeats allowed)."""
        p = self._p
        p[cells] = 1.0
        ix = self._gx_op @ p
        iy = self._gy_op @ p
        p[cells] = 0.0
        w = self._w
        wix = w * ix
        m11 = float(wix @ ix)
        m12 = float(wix @ iy)
        m22 = float((w * iy) @ iy)
        return m11 * m22 - m12 * m12 - self._k * (m11 + m22) ** 2


@lru_cache(maxsize=32)
def _cached_scorer(radius, harris_k, gaussian_sigma, sobel_size):
    return _PatchScorer(radius, harris_k, gaussian_sigma, sobel_size)


class CornerDetector(TransformerMixin, BaseEstimator):
    """Stream transformer reducing an event stream to its corner events.

    Parameters
    ----------
    sensor_size : (width, height) in pixels.
    l : local-surface window radius; each pixel queue keeps 2*l events.
    harris_k : Harris trace weight, 0 < k < 0.25.
    threshold : corner acceptance threshold on the Harris response.
    gaussian_sigma : second-moment weighting width; defaults to l / 2.
    sobel_size : gradient operator size, 5 (default) or 3.
    combine_polarities : score the OR of both polarity patches instead of
        only the patch matching the incoming event's polarity.
    border_margin : events closer than this to the sensor border are never
        corners (their patches are clipped); defaults to l.

    The transform is stateless across calls: each call replays the stream
    on a fresh surface, so identical inputs give identical outputs.
    """

    def __init__(
        self,
        sensor_size=(304, 240),
        l=DEFAULT_RADIUS,
        harris_k=DEFAULT_HARRIS_K,
        threshold=DEFAULT_THRESHOLD,
        gaussian_sigma=None,
        sobel_size=5,
        combine_polarities=False,
        border_margin=None,
    ):
        self.sensor_size = sensor_size
        self.l = l
        self.harris_k = harris_k
        self.threshold = threshold
        self.gaussian_sigma = gaussian_sigma
        self.sobel_size = sobel_size
        self.combine_polarities = combine_polarities
        self.border_margin = border_margin

    def _validate(self):
        if self.l < 2:
            raise ConfigError(f"l must be >= 2, got {self.l}")
        if not 0.0 < self.harris_k < 0.25:
            raise ConfigError(f"harris_k must be in (0, 0.25), got {self.harris_k}")
        if self.threshold <= 0.0:
            raise ConfigError(f"threshold must be > 0, got {self.threshold}")

    def fit(self, X=None, y=None):
        self._validate()
        return self

    def new_surface(self):
        return LocalSurface(self.sensor_size, self.l)

    def _scorer(self):
        sigma = self.l / 2.0 if self.gaussian_sigma is None else self.gaussian_sigma
        return _cached_scorer(int(self.l), float(self.harris_k), float(sigma), int(self.sobel_size))

    def score_event(self, surface, event):
        """Harris score of one event against a surface already updated with it."""
        scorer = self._scorer()
        return self._score(surface, scorer, int(event["x"]), int(event["y"]), int(event["polarity"]))

    def _score(self, surface, scorer, x, y, polarity):
        l = self.l
        side = scorer.side
        packed = surface._packed(polarity & 1, y, x)
        if self.combine_polarities:
            other = surface._packed((polarity & 1) ^ 1, y, x)
            if other.size:
                packed = np.concatenate([packed, other]) if packed.size else other
        if not packed.size:
            return 0.0
        v = packed.astype(np.int64)
        cells = ((v >> 16) - y + l) * side + ((v & 0xFFFF) - x + l)
        return scorer.score_cells(cells)

    def detect_events(self, X):
        """Run the stream, returning (corner events, harris scores)."""
        self._validate()
        events = np.asarray(X, dtype=EVENT_DTYPE)
        check_event_stream(events, self.sensor_size)
        width, height = self.sensor_size
        margin = self.l if self.border_margin is None else self.border_margin
        surface = self.new_surface()
        scorer = self._scorer()
        threshold = self.threshold
        keep = np.zeros(events.shape[0], dtype=bool)
        scores = []
        xs = events["x"].astype(np.int64)
        ys = events["y"].astype(np.int64)
        ps = events["polarity"].astype(np.int64)
        ts = events["t"].astype(np.int64)
        interior = (
            (xs >= margin) & (xs < width - margin) & (ys >= margin) & (ys < height - margin)
        )
        update = surface.update
        score = self._score
        for i in range(events.shape[0]):
            x = xs[i]
            y = ys[i]
            update(x, y, ps[i], ts[i])
            if not interior[i]:
                continue
            r = score(surface, scorer, x, y, ps[i])
            if r >= threshold:
                keep[i] = True
                scores.append(r)
        return events[keep], np.array(scores, dtype=np.float64)

    def transform(self, X):
        corners, _ = self.detect_events(X)
        return corners

"""Synthetic event-camera scenes with exact ground truth.

A pinhole camera undergoes pure pan/tilt rotation (piecewise constant-
velocity "joint" segments) above a textured plane; an optional fronto-
parallel textured square object translates on a nearer plane. Log-intensity
is rendered per pixel at a fixed internal rate; every time a pixel's
log-intensity moves a full contrast threshold away from its per-pixel
reference, events are emitted at linearly interpolated crossing times and
the reference snaps to the crossed level. Events are labelled independent
motion iff their pixel touches the object's projected region during the
emitting render step; everything else is background. Encoder samples of the
pan/tilt angles are produced every 10 ms.

Pure rotation makes image flow depth-independent, so a world-stationary
object moves exactly like the background — the property the stationary-
object experiments rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .events import LABEL_BACKGROUND, LABEL_INDEPENDENT, US_PER_S, make_events
from .exceptions import ConfigError

ENCODER_PERIOD_US = 10_000  # 10 ms joint sampling cadence
JOINT_NAMES = ("pan", "tilt")


# ---------------------------------------------------------------------------
# configuration


@dataclass
class TextureSpec:
    """Log-intensity texture on a plane, in plane meters.

    kinds:
      checkerboard -- +/- amplitude by cell parity (sharp edges)
      stripes      -- +/- amplitude by parity along one axis ("x" or "y")
      blobs        -- smooth random field, bilinearly interpolated from a
                      seeded per-cell grid, values in [-amplitude, amplitude]

    angle_deg rotates the pattern in the plane so that sharp edges are not
    aligned with the pixel grid; aligned edges would cross whole pixel rows
    or columns simultaneously, which no physical scene does.
    """

    kind: str = "checkerboard"
    cell_m: float = 0.22
    amplitude: float = 0.35
    axis: str = "x"
    angle_deg: float = 0.0

    def validate(self):
        if self.kind not in ("checkerboard", "stripes", "blobs"):
            raise ConfigError(f"unknown texture kind {self.kind!r}")
        if self.cell_m <= 0:
            raise ConfigError(f"texture cell_m must be > 0, got {self.cell_m}")
        if self.amplitude <= 0:
            raise ConfigError(f"texture amplitude must be > 0, got {self.amplitude}")
        if self.axis not in ("x", "y"):
            raise ConfigError(f"texture axis must be 'x' or 'y', got {self.axis!r}")
        if not np.isfinite(self.angle_deg):
            raise ConfigError(f"texture angle_deg must be finite, got {self.angle_deg}")

    def to_dict(self):
        return {
            "kind": self.kind,
            "cell_m": self.cell_m,
            "amplitude": self.amplitude,
            "axis": self.axis,
            "angle_deg": self.angle_deg,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


class _Texture:
    """Sampler for one TextureSpec; blob grids are drawn once per simulation."""

    def __init__(self, spec, rng):
        spec.validate()
        self.spec = spec
        if spec.kind == "blobs":
            n = 257
            grid = rng.uniform(-1.0, 1.0, size=(n, n))
            # mild smoothing so gradients stay bounded over a texel
            for _ in range(2):
                grid = (
                    grid
                    + np.roll(grid, 1, 0)
                    + np.roll(grid, -1, 0)
                    + np.roll(grid, 1, 1)
                    + np.roll(grid, -1, 1)
                ) / 5.0
            grid *= spec.amplitude / max(np.abs(grid).max(), 1e-12)
            self._grid = grid
            self._n = n

    def sample(self, px, py):
        s = self.spec
        if s.angle_deg:
            a = math.radians(s.angle_deg)
            ca, sa = math.cos(a), math.sin(a)
            px, py = ca * px + sa * py, -sa * px + ca * py
        cx = px / s.cell_m
        cy = py / s.cell_m
        if s.kind == "checkerboard":
            parity = (np.floor(cx) + np.floor(cy)).astype(np.int64) & 1
            return np.where(parity == 0, s.amplitude, -s.amplitude)
        if s.kind == "stripes":
            c = cx if s.axis == "x" else cy
            parity = np.floor(c).astype(np.int64) & 1
            return np.where(parity == 0, s.amplitude, -s.amplitude)
        # blobs: bilinear over a periodic grid
        n = self._n
        gx = np.mod(cx, n)
        gy = np.mod(cy, n)
        x0 = np.floor(gx).astype(np.int64)
        y0 = np.floor(gy).astype(np.int64)
        fx = gx - x0
        fy = gy - y0
        x1 = (x0 + 1) % n
        y1 = (y0 + 1) % n
        g = self._grid
        return (
            g[y0, x0] * (1 - fx) * (1 - fy)
            + g[y0, x1] * fx * (1 - fy)
            + g[y1, x0] * (1 - fx) * fy
            + g[y1, x1] * fx * fy
        )


@dataclass
class SceneConfig:
    sensor_width: int = 128
    sensor_height: int = 96
    focal_length: float = 100.0
    background: TextureSpec = field(default_factory=TextureSpec)
    background_depth_m: float = 1.0
    contrast_threshold: float = 0.35
    render_rate_hz: float = 1000.0
    noise_rate_hz_per_px: float = 0.05

    def validate(self):
        if self.sensor_width < 8 or self.sensor_height < 8:
            raise ConfigError("sensor must be at least 8x8 pixels")
        if self.focal_length <= 0:
            raise ConfigError(f"focal_length must be > 0, got {self.focal_length}")
        if self.background_depth_m <= 0:
            raise ConfigError(
                f"background_depth_m must be > 0, got {self.background_depth_m}"
            )
        if self.contrast_threshold <= 0:
            raise ConfigError(
                f"contrast_threshold must be > 0, got {self.contrast_threshold}"
            )
        if self.render_rate_hz <= 0:
            raise ConfigError(f"render_rate_hz must be > 0, got {self.render_rate_hz}")
        if self.noise_rate_hz_per_px < 0:
            raise ConfigError("noise_rate_hz_per_px must be >= 0")
        self.background.validate()

    def to_dict(self):
        return {
            "sensor_width": self.sensor_width,
            "sensor_height": self.sensor_height,
            "focal_length": self.focal_length,
            "background": self.background.to_dict(),
            "background_depth_m": self.background_depth_m,
            "contrast_threshold": self.contrast_threshold,
            "render_rate_hz": self.render_rate_hz,
            "noise_rate_hz_per_px": self.noise_rate_hz_per_px,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "background" in d:
            d["background"] = TextureSpec.from_dict(d["background"])
        return cls(**d)


@dataclass
class ObjectSpec:
    """Textured square translating on a fronto-parallel plane.

    waypoints: [(t_s, x_m, y_m)] piecewise-linear center trajectory (held
    at the ends); half_size_m: half side length; edge_softness_px: silhouette
    alpha ramp width, expressed in image pixels at the object depth.
    """

    waypoints: list = field(default_factory=lambda: [(0.0, 0.0, 0.0)])
    half_size_m: float = 0.08
    depth_m: float = 0.5
    texture: TextureSpec = field(
        default_factory=lambda: TextureSpec(kind="checkerboard", cell_m=0.05, amplitude=0.35)
    )
    edge_softness_px: float = 1.5

    def validate(self, background_depth_m):
        if self.depth_m <= 0:
            raise ConfigError(
                f"object depth_m must be > 0 (in front of the camera), got {self.depth_m}"
            )
        if self.depth_m >= background_depth_m:
            raise ConfigError(
                f"object depth_m ({self.depth_m}) must be nearer than the background "
                f"({background_depth_m})"
            )
        if self.half_size_m <= 0:
            raise ConfigError(f"half_size_m must be > 0, got {self.half_size_m}")
        if self.edge_softness_px <= 0:
            raise ConfigError(f"edge_softness_px must be > 0, got {self.edge_softness_px}")
        if len(self.waypoints) < 1:
            raise ConfigError("object needs at least one waypoint")
        ts = [w[0] for w in self.waypoints]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ConfigError("object waypoint times must strictly increase")
        self.texture.validate()

    def to_dict(self):
        return {
            "waypoints": [list(w) for w in self.waypoints],
            "half_size_m": self.half_size_m,
            "depth_m": self.depth_m,
            "texture": self.texture.to_dict(),
            "edge_softness_px": self.edge_softness_px,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "texture" in d:
            d["texture"] = TextureSpec.from_dict(d["texture"])
        if "waypoints" in d:
            d["waypoints"] = [tuple(w) for w in d["waypoints"]]
        return cls(**d)


@dataclass
class TrajectorySpec:
    """Pan/tilt joint segments and the optional independently moving object.

    pan_segments / tilt_segments: [(duration_s, rate_deg_s)] executed in
    order from angle 0; the joint holds its final angle afterwards.
    """

    pan_segments: list = field(default_factory=lambda: [(10.0, 5.0)])
    tilt_segments: list = field(default_factory=list)
    object: ObjectSpec | None = None

    def validate(self, background_depth_m):
        for name, segs in (("pan", self.pan_segments), ("tilt", self.tilt_segments)):
            for seg in segs:
                if len(seg) != 2:
                    raise ConfigError(f"{name} segment must be (duration_s, rate_deg_s)")
                if seg[0] <= 0:
                    raise ConfigError(f"{name} segment duration must be > 0")
                if not math.isfinite(seg[1]):
                    raise ConfigError(f"{name} segment rate must be finite")
        if self.object is not None:
            self.object.validate(background_depth_m)

    def to_dict(self):
        return {
            "pan_segments": [list(s) for s in self.pan_segments],
            "tilt_segments": [list(s) for s in self.tilt_segments],
            "object": None if self.object is None else self.object.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if d.get("object") is not None:
            d["object"] = ObjectSpec.from_dict(d["object"])
        for key in ("pan_segments", "tilt_segments"):
            if key in d:
                d[key] = [tuple(s) for s in d[key]]
        return cls(**d)


# ---------------------------------------------------------------------------
# trajectory evaluation


class _PiecewiseAngle:
    """angle(t) from constant-rate segments; exact linear interpolation."""

    def __init__(self, segments):
        durations = np.array([s[0] for s in segments], dtype=np.float64)
        rates = np.array([s[1] for s in segments], dtype=np.float64)
        self.knots_t = np.concatenate([[0.0], np.cumsum(durations)])
        self.knots_a = np.concatenate([[0.0], np.cumsum(rates * durations)])
        self.rates = rates

    def angle(self, t_s):
        return np.interp(t_s, self.knots_t, self.knots_a)

    def rate(self, t_s):
        t = np.asarray(t_s, dtype=np.float64)
        if self.rates.size == 0:
            return np.zeros_like(t)
        idx = np.searchsorted(self.knots_t, t, side="right") - 1
        inside = (idx >= 0) & (idx < self.rates.size) & (t < self.knots_t[-1])
        out = np.zeros_like(t)
        out[inside] = self.rates[np.clip(idx[inside], 0, self.rates.size - 1)]
        return out


class _ObjectPath:
    def __init__(self, waypoints):
        w = np.asarray(waypoints, dtype=np.float64).reshape(-1, 3)
        self.t = w[:, 0]
        self.x = w[:, 1]
        self.y = w[:, 2]

    def position(self, t_s):
        return (
            float(np.interp(t_s, self.t, self.x)),
            float(np.interp(t_s, self.t, self.y)),
        )


def _rotation(pan_deg, tilt_deg):
    """Camera-to-world rotation: pan about world y, then tilt about x."""
    p = math.radians(pan_deg)
    t = math.radians(tilt_deg)
    cp, sp = math.cos(p), math.sin(p)
    ct, st = math.cos(t), math.sin(t)
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, ct, -st], [0.0, st, ct]])
    return ry @ rx


# ---------------------------------------------------------------------------
# event extraction


def extract_crossings(l_prev, l_cur, ref, contrast, t0_us, t1_us):
    """Emit threshold crossings for one render step over flattened pixels.

    Returns (pixel_index, t_us, polarity, level_rank) arrays plus the updated
    reference (modified in place). level_rank orders simultaneous crossings
    of one pixel within the step. After the call, |l_cur - ref| < contrast
    for every pixel — no crossing is ever carried over or lost.
    """
    delta = l_cur - ref
    sign = np.sign(delta)
    n = np.floor(np.abs(delta) / contrast).astype(np.int64)
    hit = np.flatnonzero(n > 0)
    if hit.size == 0:
        return (
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.uint8),
            np.empty(0, dtype=np.int64),
        )
    counts = n[hit]
    total = int(counts.sum())
    pix = np.repeat(hit, counts)
    # rank k = 1..count within each pixel
    rank = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts) + 1
    s = sign[pix]
    levels = ref[pix] + rank * contrast * s
    rise = l_cur[pix] - l_prev[pix]
    frac = np.clip((levels - l_prev[pix]) / np.where(rise == 0.0, 1.0, rise), 0.0, 1.0)
    t = (t0_us + np.rint(frac * (t1_us - t0_us))).astype(np.int64)
    polarity = (s > 0).astype(np.uint8)
    ref[hit] += counts * contrast * sign[hit]
    return pix, t, polarity, rank


def simulate(scene, trajectory, duration_s, seed=0):
    """Render the scene into a labelled event stream and encoder samples.

    Returns (events, encoder_samples): events as an EVENT_DTYPE array with
    ground-truth labels, encoder_samples as (N, 3) float [t_us, pan_deg,
    tilt_deg] every 10 ms starting at t = 0.
    """
    scene.validate()
    trajectory.validate(scene.background_depth_m)
    if duration_s <= 0:
        raise ConfigError(f"duration_s must be > 0, got {duration_s}")

    width, height = scene.sensor_width, scene.sensor_height
    f = scene.focal_length
    cx = (width - 1) / 2.0
    cy = (height - 1) / 2.0
    contrast = float(scene.contrast_threshold)

    tex_rng = np.random.default_rng([int(seed), 0])
    noise_rng = np.random.default_rng([int(seed), 1])
    bg_tex = _Texture(scene.background, tex_rng)
    obj = trajectory.object
    if obj is not None:
        obj_tex = _Texture(obj.texture, tex_rng)
        obj_path = _ObjectPath(obj.waypoints)
        softness_m = obj.edge_softness_px * obj.depth_m / f

    pan = _PiecewiseAngle(trajectory.pan_segments)
    tilt = _PiecewiseAngle(trajectory.tilt_segments)

    # pixel rays in the camera frame (homogeneous, z = 1)
    us = (np.arange(width) - cx) / f
    vs = (np.arange(height) - cy) / f
    ray = np.empty((height, width, 3))
    ray[:, :, 0] = us[None, :]
    ray[:, :, 1] = vs[:, None]
    ray[:, :, 2] = 1.0
    ray_flat = ray.reshape(-1, 3)
    npix = ray_flat.shape[0]

    def render(t_s):
        """(log-intensity, in-object mask) over flattened pixels at time t_s."""
        r = _rotation(float(pan.angle(t_s)), float(tilt.angle(t_s)))
        dw = ray_flat @ r.T
        dz = dw[:, 2]
        if dz.min() <= 1e-6:
            raise ConfigError(
                "view ray parallel to the scene plane; reduce pan/tilt range"
            )
        px = dw[:, 0] / dz
        py = dw[:, 1] / dz
        zb = scene.background_depth_m
        logi = bg_tex.sample(px * zb, py * zb)
        if obj is None:
            return logi, None
        ox_c, oy_c = obj_path.position(t_s)
        ox = px * obj.depth_m - ox_c
        oy = py * obj.depth_m - oy_c
        d = np.maximum(np.abs(ox), np.abs(oy))
        alpha = np.clip((obj.half_size_m - d) / softness_m, 0.0, 1.0)
        region = alpha > 0.0
        if region.any():
            lobj = obj_tex.sample(ox, oy)
            logi = logi + alpha * (lobj - logi)
        return logi, region

    n_steps = int(round(duration_s * scene.render_rate_hz))
    if n_steps < 1:
        raise ConfigError("duration shorter than one render step")
    step_t_us = np.rint(
        np.arange(n_steps + 1) * (US_PER_S / scene.render_rate_hz)
    ).astype(np.int64)

    l_prev, region_prev = render(0.0)
    ref = l_prev.copy()
    if region_prev is None:
        region_prev = np.zeros(npix, dtype=bool)

    noise_lam = scene.noise_rate_hz_per_px * npix / scene.render_rate_hz

    chunks = []
    for k in range(1, n_steps + 1):
        t0, t1 = int(step_t_us[k - 1]), int(step_t_us[k])
        l_cur, region_cur = render(step_t_us[k] / US_PER_S)
        if region_cur is None:
            region_cur = region_prev
        pix, t, polarity, rank = extract_crossings(l_prev, l_cur, ref, contrast, t0, t1)
        # the object region swept during the step labels its events
        region = region_prev | region_cur
        if scene.noise_rate_hz_per_px > 0.0:
            m = int(noise_rng.poisson(noise_lam))
            if m:
                npx_idx = noise_rng.integers(0, npix, size=m)
                nt = noise_rng.integers(t0, t1 + 1, size=m)
                npol = noise_rng.integers(0, 2, size=m).astype(np.uint8)
                pix = np.concatenate([pix, npx_idx])
                t = np.concatenate([t, nt])
                polarity = np.concatenate([polarity, npol])
                rank = np.concatenate([rank, np.zeros(m, dtype=np.int64)])
        if pix.size:
            x = (pix % width).astype(np.uint16)
            y = (pix // width).astype(np.uint16)
            label = np.where(region[pix], LABEL_INDEPENDENT, LABEL_BACKGROUND).astype(
                np.uint8
            )
            order = np.lexsort((rank, x, y, t))
            chunks.append(
                make_events(
                    t[order].astype(np.uint64),
                    x[order],
                    y[order],
                    polarity[order],
                    label[order],
                )
            )
        l_prev = l_cur
        region_prev = region_cur

    if chunks:
        events = np.concatenate(chunks)
    else:
        events = make_events([], [], [], [])

    enc_t = np.arange(0, int(duration_s * US_PER_S) + 1, ENCODER_PERIOD_US)
    enc = np.column_stack(
        [
            enc_t.astype(np.float64),
            pan.angle(enc_t / US_PER_S),
            tilt.angle(enc_t / US_PER_S),
        ]
    )
    return events, enc


# ---------------------------------------------------------------------------
# ground-truth helpers


def project_checker_nodes(scene, pan_deg, tilt_deg, margin=2.0):
    """Pixel positions of all background checkerboard cell corners in view.

    Only meaningful for a checkerboard background; used as ground truth for
    corner localization checks.
    """
    spec = scene.background
    if spec.kind != "checkerboard":
        raise ConfigError("checker nodes are defined for checkerboard backgrounds only")
    width, height = scene.sensor_width, scene.sensor_height
    f = scene.focal_length
    cx = (width - 1) / 2.0
    cy = (height - 1) / 2.0
    zb = scene.background_depth_m
    r = _rotation(pan_deg, tilt_deg)
    # a conservative node range covering the field of view at this attitude
    half_span = (
        math.tan(
            math.radians(abs(pan_deg) + abs(tilt_deg))
            + math.atan(max(width, height) / (2.0 * f))
        )
        * zb
    )
    n = int(math.ceil(half_span / spec.cell_m)) + 2
    idx = np.arange(-n, n + 1) * spec.cell_m
    gx, gy = np.meshgrid(idx, idx)
    gx, gy = gx.ravel(), gy.ravel()
    if spec.angle_deg:
        # lattice nodes live in rotated texture coordinates; map them back
        a = math.radians(spec.angle_deg)
        ca, sa = math.cos(a), math.sin(a)
        gx, gy = ca * gx - sa * gy, sa * gx + ca * gy
    pts = np.column_stack([gx, gy, np.full(gx.size, zb)])
    pc = pts @ r  # camera coords: R^T p as row vectors
    valid = pc[:, 2] > 1e-6
    pc = pc[valid]
    u = f * pc[:, 0] / pc[:, 2] + cx
    v = f * pc[:, 1] / pc[:, 2] + cy
    keep = (
        (u >= -margin) & (u <= width - 1 + margin) & (v >= -margin) & (v <= height - 1 + margin)
    )
    return np.column_stack([u[keep], v[keep]])


def joint_rates(trajectory, t_s):
    """(pan_rate, tilt_rate) in deg/s at times t_s (vectorized)."""
    pan = _PiecewiseAngle(trajectory.pan_segments)
    tilt = _PiecewiseAngle(trajectory.tilt_segments)
    return pan.rate(t_s), tilt.rate(t_s)


# ---------------------------------------------------------------------------
# scenario presets


def _orbit_segments(speed_deg_s, duration_s, period_s=6.0, phase_rad=0.0, step_s=0.1):
    """Constant-speed joint-velocity orbit approximated by short segments.

    The joint-rate vector (pan_rate, tilt_rate) has constant magnitude
    `speed_deg_s` and rotates once per `period_s`, so velocity never jumps
    and the attitude stays on a circle of radius speed*period/(2*pi) degrees.
    """
    omega = 2.0 * math.pi / period_s
    pan_segs = []
    tilt_segs = []
    t = 0.0
    while t < duration_s - 1e-9:
        d = min(step_s, duration_s - t)
        mid = t + d / 2.0
        pan_segs.append((d, speed_deg_s * math.cos(omega * mid + phase_rad)))
        tilt_segs.append((d, speed_deg_s * math.sin(omega * mid + phase_rad)))
        t += d
    return pan_segs, tilt_segs


def _sweep_waypoints(
    speed_px_s,
    focal_length,
    depth_m,
    duration_s,
    half_width_px,
    half_size_px,
    lane_px=(-14.0, 0.0, 14.0),
    pause=None,
    start_s=0.3,
    gap_s=0.5,
):
    """Horizontal constant-velocity passes across the view, alternating
    direction and cycling through vertical lanes; optional mid-view pause.

    A pass runs from fully outside one side to fully outside the other, so
    velocity within a pass is constant (no turning points in view). With
    `pause=(t0, t1)` the pass crossing that window decelerates through a
    short ramp, holds still at the view center during [t0, t1], then
    accelerates away; the object is world-stationary for the whole window.
    Pixel quantities are converted to plane meters via depth/focal_length.
    """
    m_per_px = depth_m / focal_length
    span = half_width_px + half_size_px + 6.0  # fully out of view at +/- span
    wp = []
    t = start_s
    direction = -1.0  # first pass enters from the right
    lane_i = 0
    while t < duration_s - 0.2:
        lane = lane_px[lane_i % len(lane_px)]
        lane_i += 1
        x0 = -direction * span  # entry side
        ramp = ((0.65, 0.25), (0.40, 0.25), (0.15, 0.25))
        if pause is not None:
            ramp_px = sum(f * d for f, d in ramp) * speed_px_s
            approach_px = span - ramp_px
            if approach_px <= 0:
                raise ConfigError("pause ramp longer than the approach span")
            t_enter = pause[0] - 0.75 - approach_px / speed_px_s
            # this slot becomes the pause pass only if a plain pass would
            # not finish before the pause approach must begin
            take_pause = t + 2.0 * span / speed_px_s + gap_s > t_enter
        else:
            take_pause = False
        if take_pause:
            t0, t1 = pause
            if t_enter < t - 1e-9:
                raise ConfigError("pause window too early for the pass schedule")
            lane = 0.0  # the pause is scripted at the view center
            x = x0
            wp.append((t_enter, x * m_per_px, lane * m_per_px))
            x += direction * approach_px
            tt = t0 - 0.75
            wp.append((tt, x * m_per_px, lane * m_per_px))
            for f, d in ramp:
                x += direction * f * speed_px_s * d
                tt += d
                wp.append((tt, x * m_per_px, lane * m_per_px))
            # world-stationary through the pause window
            wp.append((t1, x * m_per_px, lane * m_per_px))
            # accelerate out: 2 x 0.25 s, then full speed to the exit
            for f, d in ((0.30, 0.25), (0.70, 0.25)):
                x += direction * f * speed_px_s * d
                t1 += d
                wp.append((t1, x * m_per_px, lane * m_per_px))
            remain = span - direction * x if direction > 0 else span + x
            t = t1 + abs(remain) / speed_px_s
            wp.append((t, direction * span * m_per_px, lane * m_per_px))
            pause = None
        else:
            cross_s = 2.0 * span / speed_px_s
            if not wp:
                wp.append((0.0, x0 * m_per_px, lane * m_per_px))
            wp.append((t, x0 * m_per_px, lane * m_per_px))
            wp.append((t + cross_s, -x0 * m_per_px, lane * m_per_px))
            t += cross_s
        t += gap_s
        direction = -direction
    return wp


@dataclass
class Scenario:
    name: str
    scene: SceneConfig
    trajectory: TrajectorySpec
    duration_s: float
    seed: int

    def to_dict(self):
        return {
            "name": self.name,
            "scene": self.scene.to_dict(),
            "trajectory": self.trajectory.to_dict(),
            "duration_s": self.duration_s,
            "seed": self.seed,
        }


def _default_scene():
    # Rotated pattern: pixel-grid-aligned edges would fire whole pixel
    # columns at one instant, which no physical scene does. The focal
    # length / cell size pair sets background flow near 8 px/s per deg/s
    # of joint speed with ~22 px between texture corners.
    return SceneConfig(
        focal_length=450.0,
        background=TextureSpec(cell_m=0.0489, angle_deg=31.0),
    )


def _preset_object_texture():
    # Same ~22 px corner spacing as the background at the object depth, so
    # cluster membership accrues at the same rate per pixel of travel for
    # both groups and their fitted velocities carry the same window lag.
    return TextureSpec(kind="checkerboard", cell_m=0.0244, amplitude=0.35, angle_deg=31.0)


def _preset_object(scene, speed_px_s, duration_s, pause=None):
    depth = 0.5
    half_size_m = 0.0267  # ~24 px at f=450, depth 0.5: room for several texture nodes
    half_size_px = half_size_m * scene.focal_length / depth
    return ObjectSpec(
        waypoints=_sweep_waypoints(
            speed_px_s,
            scene.focal_length,
            depth,
            duration_s,
            half_width_px=scene.sensor_width / 2.0,
            half_size_px=half_size_px,
            pause=pause,
        ),
        half_size_m=half_size_m,
        depth_m=depth,
        texture=_preset_object_texture(),
    )


# Background image speed per degree-per-second of joint-velocity magnitude.
_PX_PER_DEG_S = 450.0 * math.pi / 180.0  # ~7.85

# One shared orbit period: velocity-direction rotation rate is then
# identical across train and test at every speed, so the tracker's
# fit-window lag has the same statistics in both.
_ORBIT_PERIOD_S = 6.0


def scenario_presets():
    """Named scenario families, each a list of variants.

    train-static       -- textured background only; joint-velocity orbits
                          at several speeds covering the test range
    test-object-speed  -- head orbit at 5 deg/s, four object speeds given
                          as multiples (3..6x) of the background image
                          speed, with a scripted 2 s object pause
    test-head-speed    -- fixed object speed, head orbits at 3, 5, 10 deg/s
    checkerboard-rotation -- no object, diagonal rotation, for corner
                          localization ground truth
    """
    presets = {}

    train_rings = (2.5, 5.0, 8.0, 12.0)
    pan_segs = []
    tilt_segs = []
    for i, speed in enumerate(train_rings):
        p, q = _orbit_segments(
            speed, _ORBIT_PERIOD_S, _ORBIT_PERIOD_S, phase_rad=i * math.pi / 2.0
        )
        pan_segs.extend(p)
        tilt_segs.extend(q)
    presets["train-static"] = [
        Scenario(
            name="train-static",
            scene=_default_scene(),
            trajectory=TrajectorySpec(
                pan_segments=pan_segs, tilt_segments=tilt_segs, object=None
            ),
            duration_s=_ORBIT_PERIOD_S * len(train_rings),
            seed=101,
        )
    ]

    variants = []
    bg_px_s = 5.0 * _PX_PER_DEG_S  # ~39.3 px/s at the fixed 5 deg/s head speed
    for i, k in enumerate((3.0, 4.0, 5.0, 6.0)):
        sc = _default_scene()
        pan, tilt = _orbit_segments(5.0, 10.0, _ORBIT_PERIOD_S)
        obj = _preset_object(sc, k * bg_px_s, 10.0, pause=(4.0, 6.0))
        variants.append(
            Scenario(
                name=f"test-object-speed-{int(k)}x",
                scene=sc,
                trajectory=TrajectorySpec(
                    pan_segments=pan, tilt_segments=tilt, object=obj
                ),
                duration_s=10.0,
                seed=200 + i,
            )
        )
    presets["test-object-speed"] = variants

    variants = []
    for i, head in enumerate((3.0, 5.0, 10.0)):
        sc = _default_scene()
        pan, tilt = _orbit_segments(head, 10.0, _ORBIT_PERIOD_S)
        obj = _preset_object(sc, 115.0, 10.0)
        variants.append(
            Scenario(
                name=f"test-head-speed-{head:g}",
                scene=sc,
                trajectory=TrajectorySpec(
                    pan_segments=pan, tilt_segments=tilt, object=obj
                ),
                duration_s=10.0,
                seed=300 + i,
            )
        )
    presets["test-head-speed"] = variants

    sc = _default_scene()
    sc.noise_rate_hz_per_px = 0.0
    presets["checkerboard-rotation"] = [
        Scenario(
            name="checkerboard-rotation",
            scene=sc,
            trajectory=TrajectorySpec(
                pan_segments=[(3.0, 4.0), (3.0, -4.0)],
                tilt_segments=[(3.0, 2.5), (3.0, -2.5)],
                object=None,
            ),
            duration_s=6.0,
            seed=400,
        )
    ]
    return presets


def get_scenario(name, variant=0):
    """Look up one preset variant; raises ConfigError for unknown names."""
    presets = scenario_presets()
    if name not in presets:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(presets))}"
        )
    variants = presets[name]
    if not 0 <= variant < len(variants):
        raise ConfigError(
            f"preset {name!r} has {len(variants)} variants; asked for {variant}"
        )
    return variants[variant]

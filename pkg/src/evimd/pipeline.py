"""End-to-end pipeline driver: simulate, detect, track, learn, classify, evaluate.

The pipeline is configured by a nested :class:`PipelineConfig` that mirrors
each stage's constructor arguments and round-trips through JSON. Every stage
writes its artifact before the next stage starts, so partial runs leave
inspectable output; any failure is re-raised as :class:`StageError` naming
the stage. All artifacts are deterministic functions of the config and seed.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import evaluate as ev
from .classify import classify_stream
from .corners import CornerDetector
from .ego_model import EgoMotionRegressor, train_model
from .encoders import smooth_velocities
from .events import US_PER_S
from .exceptions import ConfigError, StageError
from .io import (
    FLOW_DTYPE,
    read_encoder_csv,
    read_event_file,
    read_flow_file,
    read_velocity_csv,
    write_detection_csv,
    write_encoder_csv,
    write_event_file,
    write_flow_file,
    write_velocity_csv,
)
from .simulate import get_scenario, simulate
from .tracking import ClusterTracker


@dataclass
class SimulateConfig:
    """Which scenario preset to render; seed/duration default to the preset's."""

    preset: str = "test-object-speed"
    variant: int = 0
    seed: int | None = None
    duration_s: float | None = None


@dataclass
class DetectorConfig:
    radius: int = 5
    harris_k: float = 0.04
    threshold: float = 8.0
    sobel_size: int = 5
    combine_polarities: bool = False


@dataclass
class TrackerConfig:
    distance: float = 5.0
    capacity: int = 50
    min_events: int = 15
    refresh_s: float = 1.0
    anchor: str = "latest"


@dataclass
class EncoderConfig:
    alpha: float = 0.5


@dataclass
class LearnConfig:
    min_clusters: int = 5
    refresh_s: float = 1.0
    lam: float = 1e-3
    epsilon: float = 1e-6


@dataclass
class ClassifyConfig:
    threshold: float = 4.0


@dataclass
class EvaluateConfig:
    bin_width_s: float = 0.01
    sweep_min: float = 0.1
    sweep_max: float = 50.0
    sweep_count: int = 100
    svg: bool = False


@dataclass
class StageToggles:
    simulate: bool = True
    detect: bool = True
    track: bool = True
    learn: bool = True
    classify: bool = True
    evaluate: bool = True


@dataclass
class PipelineConfig:
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    learn: LearnConfig = field(default_factory=LearnConfig)
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    evaluate: EvaluateConfig = field(default_factory=EvaluateConfig)
    stages: StageToggles = field(default_factory=StageToggles)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        """Build a config from a (possibly partial) nested dict of overrides."""
        cfg = cls()
        if not isinstance(data, dict):
            raise ConfigError(f"config root must be an object, got {type(data).__name__}")
        sections = {f.name: f for f in dataclasses.fields(cls)}
        for section, values in data.items():
            if section not in sections:
                raise ConfigError(f"unknown config section {section!r}")
            target = getattr(cfg, section)
            known = {f.name for f in dataclasses.fields(target)}
            if not isinstance(values, dict):
                raise ConfigError(f"config section {section!r} must be an object")
            for key, value in values.items():
                if key not in known:
                    raise ConfigError(f"unknown config key {section}.{key}")
                setattr(target, key, value)
        return cfg

    def to_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class PipelineInputs:
    """Optional pre-existing artifacts; a provided path disables that stage."""

    events: str | None = None
    encoders: str | None = None
    flow: str | None = None
    model: str | None = None


def _stage(name):
    """Decorator-free helper: wrap a stage body so errors carry the stage name."""

    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, StageError):
                raise StageError(name, exc) from exc
            return False

    return _Ctx()


def run_pipeline(cfg, out_dir, inputs=None):
    """Run the enabled stages, writing artifacts under ``out_dir``.

    Returns a dict mapping artifact names to paths. Stages consume either
    the upstream stage's in-memory output or the file named in ``inputs``.
    """
    if inputs is None:
        inputs = PipelineInputs()
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    events = None
    sensor_size = None
    encoder_samples = None  # (N, 1+J) [t_us, positions...]
    flow = None
    velocity_samples = None  # (N, 1+J) [t_us, velocities...]
    model = None

    if inputs.events is not None:
        with _stage("inputs"):
            sensor_size, events = read_event_file(inputs.events)
    elif cfg.stages.simulate:
        with _stage("simulate"):
            scn = get_scenario(cfg.simulate.preset, cfg.simulate.variant)
            seed = scn.seed if cfg.simulate.seed is None else cfg.simulate.seed
            duration = (
                scn.duration_s if cfg.simulate.duration_s is None else cfg.simulate.duration_s
            )
            events, enc = simulate(scn.scene, scn.trajectory, duration, seed=seed)
            sensor_size = (scn.scene.sensor_width, scn.scene.sensor_height)
            paths["events"] = os.path.join(out_dir, "events.evt")
            write_event_file(paths["events"], sensor_size, events)
            paths["encoders"] = os.path.join(out_dir, "encoders.csv")
            write_encoder_csv(paths["encoders"], enc[:, 0], enc[:, 1:])
            encoder_samples = enc

    if inputs.encoders is not None:
        with _stage("inputs"):
            t_us, positions = read_encoder_csv(inputs.encoders)
            encoder_samples = np.column_stack([t_us.astype(np.float64), positions])

    if encoder_samples is not None:
        with _stage("encoders"):
            t_v, vel = smooth_velocities(
                encoder_samples[:, 0].astype(np.int64),
                encoder_samples[:, 1:],
                alpha=cfg.encoder.alpha,
            )
            velocity_samples = np.column_stack([t_v.astype(np.float64), vel])
            paths["velocities"] = os.path.join(out_dir, "velocities.csv")
            write_velocity_csv(paths["velocities"], t_v, vel)

    corners = None
    if cfg.stages.detect and events is not None:
        with _stage("detect"):
            det = CornerDetector(
                sensor_size=sensor_size,
                l=cfg.detector.radius,
                harris_k=cfg.detector.harris_k,
                threshold=cfg.detector.threshold,
                sobel_size=cfg.detector.sobel_size,
                combine_polarities=cfg.detector.combine_polarities,
            )
            corners, _scores = det.detect_events(events)
            paths["corners"] = os.path.join(out_dir, "corners.evt")
            write_event_file(paths["corners"], sensor_size, corners)

    if inputs.flow is not None:
        with _stage("inputs"):
            flow = read_flow_file(inputs.flow)
    elif cfg.stages.track and corners is not None:
        with _stage("track"):
            tracker = ClusterTracker(
                distance=cfg.tracker.distance,
                capacity=cfg.tracker.capacity,
                min_events=cfg.tracker.min_events,
                refresh_us=int(round(cfg.tracker.refresh_s * US_PER_S)),
                anchor=cfg.tracker.anchor,
            )
            rows = []
            for e in corners:
                out = tracker.step(int(e["t"]), float(e["x"]), float(e["y"]))
                if out is not None:
                    cid, vx, vy = out
                    rows.append(
                        (e["t"], e["x"], e["y"], e["polarity"], e["label"], cid, vx, vy)
                    )
            flow = np.zeros(len(rows), dtype=FLOW_DTYPE)
            for i, row in enumerate(rows):
                flow[i] = row
            paths["flow"] = os.path.join(out_dir, "flow.flw")
            write_flow_file(paths["flow"], flow)

    if cfg.stages.learn:
        with _stage("learn"):
            if flow is None:
                raise ConfigError("learn stage needs a flow stream (track stage or inputs.flow)")
            if velocity_samples is None:
                raise ConfigError("learn stage needs encoder data (simulate or inputs.encoders)")
            model = train_model(
                flow,
                velocity_samples,
                min_clusters=cfg.learn.min_clusters,
                refresh_us=int(round(cfg.learn.refresh_s * US_PER_S)),
                lam=cfg.learn.lam,
                epsilon=cfg.learn.epsilon,
            )
            paths["model"] = os.path.join(out_dir, "model.json")
            model.save(paths["model"])
    elif inputs.model is not None:
        with _stage("inputs"):
            model = EgoMotionRegressor.load(inputs.model)

    detections = None
    if cfg.stages.classify:
        with _stage("classify"):
            if flow is None:
                raise ConfigError("classify stage needs a flow stream")
            if model is None:
                raise ConfigError("classify stage needs a model (learn stage or inputs.model)")
            if velocity_samples is None:
                raise ConfigError("classify stage needs encoder data")
            detections = classify_stream(
                flow, model, velocity_samples, threshold=cfg.classify.threshold
            )
            paths["detections"] = os.path.join(out_dir, "detections.csv")
            write_detection_csv(paths["detections"], detections)

    if cfg.stages.evaluate and detections is not None:
        with _stage("evaluate"):
            thresholds = np.geomspace(
                cfg.evaluate.sweep_min, cfg.evaluate.sweep_max, cfg.evaluate.sweep_count
            )
            points = ev.pr_sweep(detections, thresholds)
            paths["pr"] = os.path.join(out_dir, "pr.csv")
            ev.write_pr_csv(paths["pr"], points)
            trace = ev.distance_trace(detections, bin_width_s=cfg.evaluate.bin_width_s)
            paths["trace"] = os.path.join(out_dir, "trace.csv")
            ev.write_trace_csv(paths["trace"], trace)
            traj_dir = os.path.join(out_dir, "trajectories")
            ev.export_trajectories(detections, traj_dir)
            paths["trajectories"] = traj_dir
            if cfg.evaluate.svg:
                rec = [p.recall for p in points if p.precision is not None]
                prec = [p.precision for p in points if p.precision is not None]
                paths["pr_svg"] = os.path.join(out_dir, "pr.svg")
                ev.write_svg_lines(
                    paths["pr_svg"],
                    [("PR", np.asarray(rec), np.asarray(prec))],
                    title="precision vs recall",
                    x_label="recall",
                    y_label="precision",
                )
                paths["trace_svg"] = os.path.join(out_dir, "trace.svg")
                ev.write_svg_lines(
                    paths["trace_svg"],
                    [
                        ("object", trace["t"], trace["mean_object"]),
                        ("background", trace["t"], trace["mean_background"]),
                    ],
                    title="mean distance per bin",
                    x_label="time [s]",
                    y_label="distance",
                )

    return paths

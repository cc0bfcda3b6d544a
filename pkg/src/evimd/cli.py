"""Command-line interface for the event-motion toolkit.

Each subcommand runs one stage on files; ``pipeline`` chains them. A JSON
config file (the :class:`~evimd.pipeline.PipelineConfig` layout, possibly
partial) overrides defaults; failures exit nonzero with a stage-tagged
message on stderr.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import evaluate as ev
from .classify import classify_stream
from .corners import CornerDetector
from .ego_model import EgoMotionRegressor, train_model
from .encoders import smooth_velocities
from .events import US_PER_S
from .exceptions import StageError
from .io import (
    FLOW_DTYPE,
    read_detection_csv,
    read_encoder_csv,
    read_event_file,
    read_flow_file,
    write_detection_csv,
    write_encoder_csv,
    write_event_file,
    write_flow_file,
)
from .pipeline import PipelineConfig, PipelineInputs, run_pipeline
from .simulate import get_scenario, scenario_presets, simulate
from .tracking import ClusterTracker


def _load_config(path):
    if path is None:
        return PipelineConfig()
    return PipelineConfig.from_json(path)


def _read_velocities(path, cfg):
    t_us, positions = read_encoder_csv(path)
    t_v, vel = smooth_velocities(t_us, positions, alpha=cfg.encoder.alpha)
    return np.column_stack([t_v.astype(np.float64), vel])


def _cmd_simulate(args):
    cfg = _load_config(args.config)
    scn = get_scenario(args.preset, args.variant)
    seed = scn.seed if args.seed is None else args.seed
    duration = scn.duration_s if args.duration is None else args.duration
    events, enc = simulate(scn.scene, scn.trajectory, duration, seed=seed)
    sensor = (scn.scene.sensor_width, scn.scene.sensor_height)
    write_event_file(args.out_events, sensor, events)
    if args.out_encoders:
        write_encoder_csv(args.out_encoders, enc[:, 0], enc[:, 1:])
    print(f"{scn.name}: {events.shape[0]} events over {duration} s -> {args.out_events}")
    return 0


def _cmd_detect(args):
    cfg = _load_config(args.config)
    sensor, events = read_event_file(args.events)
    det = CornerDetector(
        sensor_size=sensor,
        l=cfg.detector.radius,
        harris_k=cfg.detector.harris_k,
        threshold=cfg.detector.threshold,
        sobel_size=cfg.detector.sobel_size,
        combine_polarities=cfg.detector.combine_polarities,
    )
    corners, _ = det.detect_events(events)
    write_event_file(args.out, sensor, corners)
    print(f"{corners.shape[0]} corner events ({corners.shape[0] / max(events.shape[0], 1):.2%}) -> {args.out}")
    return 0


def _cmd_track(args):
    cfg = _load_config(args.config)
    _sensor, corners = read_event_file(args.corners)
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
            rows.append((e["t"], e["x"], e["y"], e["polarity"], e["label"], cid, vx, vy))
    flow = np.zeros(len(rows), dtype=FLOW_DTYPE)
    for i, row in enumerate(rows):
        flow[i] = row
    write_flow_file(args.out, flow)
    print(f"{flow.shape[0]} flow events -> {args.out}")
    return 0


def _cmd_learn(args):
    cfg = _load_config(args.config)
    flow = read_flow_file(args.flows)
    velocity_samples = _read_velocities(args.encoders, cfg)
    model = train_model(
        flow,
        velocity_samples,
        min_clusters=cfg.learn.min_clusters,
        refresh_us=int(round(cfg.learn.refresh_s * US_PER_S)),
        lam=cfg.learn.lam,
        epsilon=cfg.learn.epsilon,
    )
    model.save(args.out)
    print(f"model over {model.support_.shape[0]} examples -> {args.out}")
    return 0


def _cmd_classify(args):
    cfg = _load_config(args.config)
    if args.threshold is not None:
        cfg.classify.threshold = args.threshold
    flow = read_flow_file(args.flows)
    model = EgoMotionRegressor.load(args.model)
    velocity_samples = _read_velocities(args.encoders, cfg)
    det = classify_stream(flow, model, velocity_samples, threshold=cfg.classify.threshold)
    write_detection_csv(args.out, det)
    n_indep = int((det["label"] == 1).sum())
    print(
        f"{det.shape[0]} detections, {n_indep} independent at T={cfg.classify.threshold} -> {args.out}"
    )
    return 0


def _cmd_evaluate(args):
    import os

    cfg = _load_config(args.config)
    det = read_detection_csv(args.detections)
    os.makedirs(args.out_dir, exist_ok=True)
    thresholds = np.geomspace(
        cfg.evaluate.sweep_min, cfg.evaluate.sweep_max, cfg.evaluate.sweep_count
    )
    points = ev.pr_sweep(det, thresholds)
    ev.write_pr_csv(os.path.join(args.out_dir, "pr.csv"), points)
    trace = ev.distance_trace(det, bin_width_s=cfg.evaluate.bin_width_s)
    ev.write_trace_csv(os.path.join(args.out_dir, "trace.csv"), trace)
    ev.export_trajectories(det, os.path.join(args.out_dir, "trajectories"))
    if args.svg or cfg.evaluate.svg:
        rec = [p.recall for p in points if p.precision is not None]
        prec = [p.precision for p in points if p.precision is not None]
        ev.write_svg_lines(
            os.path.join(args.out_dir, "pr.svg"),
            [("PR", np.asarray(rec), np.asarray(prec))],
            title="precision vs recall",
            x_label="recall",
            y_label="precision",
        )
        ev.write_svg_lines(
            os.path.join(args.out_dir, "trace.svg"),
            [
                ("object", trace["t"], trace["mean_object"]),
                ("background", trace["t"], trace["mean_background"]),
            ],
            title="mean distance per bin",
            x_label="time [s]",
            y_label="distance",
        )
    print(f"evaluation artifacts -> {args.out_dir}")
    return 0


def _cmd_pipeline(args):
    cfg = _load_config(args.config)
    if args.preset is not None:
        cfg.simulate.preset = args.preset
    if args.variant is not None:
        cfg.simulate.variant = args.variant
    if args.seed is not None:
        cfg.simulate.seed = args.seed
    if args.threshold is not None:
        cfg.classify.threshold = args.threshold
    if args.no_learn:
        cfg.stages.learn = False
    inputs = PipelineInputs(
        events=args.events, encoders=args.encoders, flow=args.flows, model=args.model
    )
    paths = run_pipeline(cfg, args.out_dir, inputs)
    for name in sorted(paths):
        print(f"{name}: {paths[name]}")
    return 0


def _cmd_presets(args):
    for name, variants in scenario_presets().items():
        tags = ", ".join(v.name for v in variants)
        print(f"{name}: {tags}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="evimd",
        description="event-camera independent-motion detection toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config overriding defaults")

    p = sub.add_parser("simulate", help="render a scenario preset to an event file")
    common(p)
    p.add_argument("--preset", default="test-object-speed")
    p.add_argument("--variant", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--duration", type=float, default=None, help="seconds")
    p.add_argument("--out-events", required=True)
    p.add_argument("--out-encoders", default=None)
    p.set_defaults(func=_cmd_simulate, stage="simulate")

    p = sub.add_parser("detect-corners", help="filter an event file to corner events")
    common(p)
    p.add_argument("--events", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_detect, stage="detect")

    p = sub.add_parser("track", help="cluster corner events and estimate velocities")
    common(p)
    p.add_argument("--corners", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_track, stage="track")

    p = sub.add_parser("learn", help="fit the ego-motion flow model")
    common(p)
    p.add_argument("--flows", required=True)
    p.add_argument("--encoders", required=True, help="raw joint-position CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_learn, stage="learn")

    p = sub.add_parser("classify", help="label flow events as ego/independent")
    common(p)
    p.add_argument("--flows", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--encoders", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("-T", "--threshold", type=float, default=None)
    p.set_defaults(func=_cmd_classify, stage="classify")

    p = sub.add_parser("evaluate", help="PR sweep, distance trace, trajectory export")
    common(p)
    p.add_argument("--detections", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=_cmd_evaluate, stage="evaluate")

    p = sub.add_parser("pipeline", help="run all stages end to end")
    common(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--preset", default=None)
    p.add_argument("--variant", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-T", "--threshold", type=float, default=None)
    p.add_argument("--no-learn", action="store_true", help="use --model instead of training")
    p.add_argument("--events", default=None, help="existing EVT0 input")
    p.add_argument("--encoders", default=None, help="existing encoder CSV input")
    p.add_argument("--flows", default=None, help="existing FLW0 input")
    p.add_argument("--model", default=None, help="existing model JSON input")
    p.set_defaults(func=_cmd_pipeline, stage="pipeline")

    p = sub.add_parser("presets", help="list scenario presets")
    p.set_defaults(func=_cmd_presets, stage="presets")

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - boundary: every failure needs a tagged exit
        print(f"error: [{args.stage}] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

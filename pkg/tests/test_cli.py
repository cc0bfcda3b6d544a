"""Tests driving the command-line interface through ``evimd.cli.main``."""

import json
import os

import numpy as np
import pytest

from evimd import (
    EgoMotionRegressor,
    read_detection_csv,
    read_event_file,
    read_flow_file,
)
from evimd.cli import main


@pytest.fixture(scope="module")
def chain(tmp_path_factory):
    """Run every stage subcommand once on a short no-object scenario."""
    d = tmp_path_factory.mktemp("cli")

    def p(name):
        return str(d / name)

    rcs = {}
    rcs["simulate"] = main(
        [
            "simulate",
            "--preset",
            "checkerboard-rotation",
            "--duration",
            "1.5",
            "--out-events",
            p("events.evt"),
            "--out-encoders",
            p("enc.csv"),
        ]
    )
    rcs["detect"] = main(
        ["detect-corners", "--events", p("events.evt"), "--out", p("corners.evt")]
    )
    rcs["track"] = main(
        ["track", "--corners", p("corners.evt"), "--out", p("flow.flw")]
    )
    rcs["learn"] = main(
        ["learn", "--flows", p("flow.flw"), "--encoders", p("enc.csv"), "--out", p("model.json")]
    )
    rcs["classify"] = main(
        [
            "classify",
            "--flows",
            p("flow.flw"),
            "--model",
            p("model.json"),
            "--encoders",
            p("enc.csv"),
            "--out",
            p("det.csv"),
            "-T",
            "3.0",
        ]
    )
    rcs["evaluate"] = main(
        ["evaluate", "--detections", p("det.csv"), "--out-dir", p("eval")]
    )
    return d, rcs


def test_chain_exit_codes(chain):
    _, rcs = chain
    assert rcs == {name: 0 for name in rcs}


def test_chain_artifacts(chain):
    d, _ = chain
    sensor, events = read_event_file(str(d / "events.evt"))
    assert sensor == (128, 96) and events.shape[0] > 1000
    _, corners = read_event_file(str(d / "corners.evt"))
    assert 0 < corners.shape[0] < events.shape[0]
    flow = read_flow_file(str(d / "flow.flw"))
    assert flow.shape[0] > 100
    model = EgoMotionRegressor.load(str(d / "model.json"))
    assert model.support_.shape[0] >= 2
    det = read_detection_csv(str(d / "det.csv"))
    assert det.shape[0] == flow.shape[0]
    for name in ("pr.csv", "trace.csv", "trajectories"):
        assert os.path.exists(str(d / "eval" / name)), name


def test_classify_threshold_flag_changes_labels(chain, tmp_path, capsys):
    d, _ = chain
    out = str(tmp_path / "det_tight.csv")
    rc = main(
        [
            "classify",
            "--flows",
            str(d / "flow.flw"),
            "--model",
            str(d / "model.json"),
            "--encoders",
            str(d / "enc.csv"),
            "--out",
            out,
            "-T",
            "0.05",
        ]
    )
    assert rc == 0
    assert "T=0.05" in capsys.readouterr().out
    tight = read_detection_csv(out)
    loose = read_detection_csv(str(d / "det.csv"))
    # a much tighter gate flags at least as many events as the loose one
    assert (tight["label"] == 1).sum() >= (loose["label"] == 1).sum()
    np.testing.assert_array_equal(tight["distance"], loose["distance"])


def test_evaluate_svg_flag(chain, tmp_path):
    d, _ = chain
    out = str(tmp_path / "eval_svg")
    rc = main(["evaluate", "--detections", str(d / "det.csv"), "--out-dir", out, "--svg"])
    assert rc == 0
    for name in ("pr.svg", "trace.svg"):
        assert os.path.getsize(os.path.join(out, name)) > 0


def test_pipeline_subcommand_reuses_inputs(chain, tmp_path):
    d, _ = chain
    out = str(tmp_path / "pipe")
    rc = main(
        [
            "pipeline",
            "--out-dir",
            out,
            "--events",
            str(d / "events.evt"),
            "--encoders",
            str(d / "enc.csv"),
            "--model",
            str(d / "model.json"),
            "--no-learn",
        ]
    )
    assert rc == 0
    det = read_detection_csv(os.path.join(out, "detections.csv"))
    assert det.shape[0] > 100
    assert os.path.exists(os.path.join(out, "pr.csv"))
    # provided inputs are consumed, not regenerated
    assert not os.path.exists(os.path.join(out, "events.evt"))
    assert not os.path.exists(os.path.join(out, "model.json"))


def test_presets_listing(capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    for name in ("train-static", "test-object-speed", "test-head-speed", "checkerboard-rotation"):
        assert name in out
    assert "test-object-speed-6x" in out
    assert "test-head-speed-10" in out


def test_missing_file_is_stage_tagged(tmp_path, capsys):
    rc = main(
        ["detect-corners", "--events", str(tmp_path / "nope.evt"), "--out", str(tmp_path / "x")]
    )
    assert rc == 1
    assert capsys.readouterr().err.startswith("error: [detect]")


def test_unknown_preset_is_stage_tagged(tmp_path, capsys):
    rc = main(
        ["simulate", "--preset", "nope", "--out-events", str(tmp_path / "x.evt")]
    )
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("error: [simulate]")
    assert "unknown preset" in err


def test_bad_config_key_is_stage_tagged(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tracker": {"radius": 1}}))
    rc = main(
        [
            "track",
            "--config",
            str(cfg),
            "--corners",
            str(tmp_path / "unused.evt"),
            "--out",
            str(tmp_path / "x"),
        ]
    )
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("error: [track]")
    assert "unknown config key tracker.radius" in err


def test_config_file_overrides_defaults(chain, tmp_path):
    d, _ = chain
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"detector": {"threshold": 1e9}}))
    out = str(tmp_path / "no_corners.evt")
    rc = main(
        ["detect-corners", "--config", str(cfg), "--events", str(d / "events.evt"), "--out", out]
    )
    assert rc == 0
    _, corners = read_event_file(out)
    assert corners.shape[0] == 0  # an unreachable score bar keeps everything out

"""Mahalanobis gating of flow events against predicted flow statistics."""

import numpy as np
import pytest

from evimd import (
    ConfigError,
    CoverageError,
    DETECTION_DTYPE,
    EgoMotionRegressor,
    FlowStatistics,
    IndependentMotionClassifier,
    LABEL_EGO,
    LABEL_INDEPENDENT_MOTION,
    classify_stream,
    mahalanobis,
)

from test_ego_model import flow_from_emissions


class StubModel:
    """predict_stats stand-in: mean = (10 * joint_v0, 0), identity covariance."""

    def __init__(self, gain=10.0, cov=None):
        self.gain = gain
        self.cov = np.eye(2) if cov is None else np.asarray(cov, dtype=float)

    def predict_stats(self, X):
        X = np.atleast_2d(X)
        return [
            FlowStatistics(mu=np.array([self.gain * row[0], 0.0]), cov=self.cov.copy())
            for row in X
        ]


def labeled_flow(rows):
    """rows: (t_us, vx, vy[, gt_label])."""
    out = flow_from_emissions([(r[0], 0, r[1], r[2]) for r in rows])
    for i, r in enumerate(rows):
        if len(r) > 3:
            out[i]["label"] = r[3]
    return out


# ---------------------------------------------------------------------------
# distance


def test_distance_trio_exact():
    at_mean = FlowStatistics(mu=np.array([3.0, -1.0]), cov=np.eye(2))
    assert mahalanobis(np.array([3.0, -1.0]), at_mean) == pytest.approx(0.0, abs=1e-12)
    identity = FlowStatistics(mu=np.zeros(2), cov=np.eye(2))
    assert mahalanobis(np.array([3.0, 4.0]), identity) == pytest.approx(5.0, abs=1e-12)
    diag = FlowStatistics(mu=np.zeros(2), cov=np.diag([4.0, 1.0]))
    assert mahalanobis(np.array([2.0, 2.0]), diag) == pytest.approx(
        np.sqrt(5.0), abs=1e-12
    )


def test_distance_scales_inversely_with_sigma():
    v = np.array([6.0, -8.0])
    base = mahalanobis(v, FlowStatistics(mu=np.zeros(2), cov=np.eye(2)))
    wide = mahalanobis(v, FlowStatistics(mu=np.zeros(2), cov=4.0 * np.eye(2)))
    assert wide == pytest.approx(base / 2.0, abs=1e-12)


def test_distance_uses_full_covariance():
    # correlated covariance: distance along the correlated direction shrinks
    cov = np.array([[1.0, 0.9], [0.9, 1.0]])
    stats = FlowStatistics(mu=np.zeros(2), cov=cov)
    along = mahalanobis(np.array([1.0, 1.0]), stats)
    across = mahalanobis(np.array([1.0, -1.0]), stats)
    assert along < across


# ---------------------------------------------------------------------------
# stream classification


def test_boundary_distance_stays_ego():
    model = StubModel(gain=0.0)
    # velocity (3, 4): distance exactly 5 under identity covariance
    flow = labeled_flow([(10_000, 3.0, 4.0)])
    samples = np.array([[0.0, 0.0]])
    det = classify_stream(flow, model, samples, threshold=5.0)
    assert det["label"][0] == LABEL_EGO
    det = classify_stream(flow, model, samples, threshold=4.999999)
    assert det["label"][0] == LABEL_INDEPENDENT_MOTION


def test_velocity_at_predicted_mean_is_ego_for_any_threshold():
    model = StubModel(gain=10.0)
    flow = labeled_flow([(10_000, 20.0, 0.0)])
    samples = np.array([[0.0, 2.0]])  # predicted mean (20, 0)
    for threshold in (1e-9, 0.5, 4.0, 100.0):
        det = classify_stream(flow, model, samples, threshold=threshold)
        assert det["label"][0] == LABEL_EGO
        assert det["distance"][0] == pytest.approx(0.0, abs=1e-12)


def test_independent_count_monotone_in_threshold(rng):
    model = StubModel(gain=0.0)
    n = 300
    flow = labeled_flow(
        [(k * 100, *rng.normal(scale=5.0, size=2)) for k in range(n)]
    )
    samples = np.array([[0.0, 0.0]])
    counts = []
    for threshold in np.geomspace(0.1, 50, 40):
        det = classify_stream(flow, model, samples, threshold=threshold)
        counts.append(int((det["label"] == LABEL_INDEPENDENT_MOTION).sum()))
    assert all(a >= b for a, b in zip(counts, counts[1:]))


def test_zero_order_hold_uses_latest_sample():
    model = StubModel(gain=10.0, cov=1e-6 * np.eye(2))
    # joint velocity jumps from 1 to 5 at t=100ms: predictions jump from
    # mean (10, 0) to (50, 0)
    samples = np.array([[0.0, 1.0], [100_000.0, 5.0]])
    flow = labeled_flow(
        [(50_000, 10.0, 0.0), (99_999, 10.0, 0.0), (100_000, 10.0, 0.0), (150_000, 50.0, 0.0)]
    )
    det = classify_stream(flow, model, samples, threshold=4.0)
    assert list(det["label"]) == [LABEL_EGO, LABEL_EGO, LABEL_INDEPENDENT_MOTION, LABEL_EGO]


def test_flow_before_first_sample_errors():
    model = StubModel()
    flow = labeled_flow([(5_000, 1.0, 0.0)])
    samples = np.array([[10_000.0, 0.0]])
    with pytest.raises(CoverageError):
        classify_stream(flow, model, samples, threshold=4.0)


def test_empty_flow_is_empty_detections():
    det = classify_stream(
        labeled_flow([]), StubModel(), np.array([[0.0, 0.0]]), threshold=4.0
    )
    assert det.shape == (0,)
    assert det.dtype == DETECTION_DTYPE


def test_threshold_validation():
    with pytest.raises(ConfigError):
        classify_stream(labeled_flow([]), StubModel(), np.zeros((1, 2)), threshold=0.0)
    with pytest.raises(ConfigError):
        classify_stream(labeled_flow([]), StubModel(), np.zeros((1, 2)), threshold=-1.0)


def test_fields_carried_through():
    model = StubModel(gain=0.0)
    flow = labeled_flow([(10_000, 30.0, 0.0, 2), (20_000, 0.1, 0.0, 1)])
    flow["x"] = [7, 8]
    flow["y"] = [9, 10]
    flow["polarity"] = [1, 0]
    flow["cluster_id"] = [3, 4]
    det = classify_stream(flow, model, np.array([[0.0, 0.0]]), threshold=4.0)
    assert list(det["t"]) == [10_000, 20_000]
    assert list(det["x"]) == [7, 8]
    assert list(det["y"]) == [9, 10]
    assert list(det["polarity"]) == [1, 0]
    assert list(det["cluster_id"]) == [3, 4]
    assert list(det["gt_label"]) == [2, 1]
    assert list(det["label"]) == [LABEL_INDEPENDENT_MOTION, LABEL_EGO]
    np.testing.assert_allclose(det["vx"], [30.0, 0.1])


def test_real_model_round_trip(rng):
    # end to end with the actual regressor: near-interpolating fit queried at
    # a training input, so the predicted mean there is the training target
    X = np.column_stack([np.linspace(-5, 5, 20), np.linspace(2, -2, 20)])
    mu = np.column_stack([8.0 * X[:, 0], -8.0 * X[:, 1]])
    cov = np.column_stack([np.full(20, 4.0), np.zeros(20), np.full(20, 4.0)])
    model = EgoMotionRegressor(lam=1e-6).fit(X, np.column_stack([mu, cov]))
    samples = np.array([[0.0, 5.0, -2.0]])  # the last training input
    flow = labeled_flow([(10_000, 40.0, 16.0), (10_001, 100.0, -60.0)])
    det = classify_stream(flow, model, samples, threshold=4.0)
    assert det["label"][0] == LABEL_EGO
    assert det["distance"][0] == pytest.approx(0.0, abs=1e-2)
    assert det["label"][1] == LABEL_INDEPENDENT_MOTION


def test_estimator_wrapper():
    clf = IndependentMotionClassifier(model=StubModel(gain=0.0), threshold=4.0)
    flow = labeled_flow([(10_000, 30.0, 0.0)])
    det = clf.fit().classify(flow, np.array([[0.0, 0.0]]))
    assert det["label"][0] == LABEL_INDEPENDENT_MOTION
    assert clf.get_params()["threshold"] == 4.0
    with pytest.raises(ConfigError):
        IndependentMotionClassifier(model=None).classify(flow, np.zeros((1, 2)))
    with pytest.raises(ConfigError):
        IndependentMotionClassifier(model=StubModel(), threshold=0.0).fit()

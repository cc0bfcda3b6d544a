"""Evaluation harness: threshold sweeps, distance traces, trajectory exports.

All metrics are computed event-by-event over flow detections that carry
ground-truth region labels. Precision/recall counts treat object-region flow
events above the threshold as true positives, background flow events above it
as false positives, and object events at or below it as false negatives.
Undefined ratios (empty denominators) are reported as ``None`` and written as
empty CSV fields so curve tails stay honest.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .events import LABEL_INDEPENDENT
from .exceptions import InsufficientDataError
from .io import DETECTION_DTYPE

DEFAULT_THRESHOLDS = np.geomspace(0.1, 50.0, 100)


@dataclass(frozen=True)
class PRPoint:
    """One operating point of the detector at threshold ``threshold``."""

    threshold: float
    precision: float | None
    recall: float | None
    tp: int
    fp: int
    fn: int


def _checked_detections(detections):
    det = np.asarray(detections, dtype=DETECTION_DTYPE)
    has_gt = (det["gt_label"] == LABEL_INDEPENDENT) | (det["gt_label"] == 1)
    if det.shape[0] == 0 or not has_gt.any():
        raise InsufficientDataError(
            "detections carry no ground-truth labels; metrics need labelled flow events"
        )
    return det


def pr_sweep(detections, thresholds=None):
    """Precision/recall over a threshold sweep, one :class:`PRPoint` per T.

    ``thresholds`` defaults to 100 log-spaced values in [0.1, 50]. Detections
    must carry ground-truth labels; an unlabelled set raises
    :class:`InsufficientDataError`.
    """
    det = _checked_detections(detections)
    if thresholds is None:
        thresholds = DEFAULT_THRESHOLDS
    thresholds = np.asarray(thresholds, dtype=np.float64)

    is_obj = det["gt_label"] == LABEL_INDEPENDENT
    d_obj = np.sort(det["distance"][is_obj])
    d_bg = np.sort(det["distance"][~is_obj])
    n_obj = d_obj.size

    points = []
    for t in thresholds:
        tp = int(n_obj - np.searchsorted(d_obj, t, side="right"))
        fp = int(d_bg.size - np.searchsorted(d_bg, t, side="right"))
        fn = n_obj - tp
        precision = tp / (tp + fp) if tp + fp > 0 else None
        recall = tp / (tp + fn) if tp + fn > 0 else None
        points.append(PRPoint(float(t), precision, recall, tp, fp, fn))
    return points


def _cell(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value))


def write_pr_csv(path, points):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "precision", "recall", "tp", "fp", "fn"])
        for p in points:
            writer.writerow(
                [_cell(p.threshold), _cell(p.precision), _cell(p.recall), p.tp, p.fp, p.fn]
            )


def read_pr_csv(path):
    points = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            points.append(
                PRPoint(
                    float(row[0]),
                    float(row[1]) if row[1] else None,
                    float(row[2]) if row[2] else None,
                    int(row[3]),
                    int(row[4]),
                    int(row[5]),
                )
            )
    return points


def distance_trace(detections, bin_width_s=0.01):
    """Mean Mahalanobis distance per time bin, split by ground-truth group.

    Returns a structured array with fields ``t`` (bin start, seconds),
    ``mean_object``, ``mean_background``, ``n_object``, ``n_background``.
    Bins where a group has no events carry NaN for that mean (a gap, not a
    zero). Bins are anchored at t = 0 so identical inputs bin identically.
    """
    det = _checked_detections(detections)
    if bin_width_s <= 0:
        raise ValueError(f"bin_width_s must be > 0, got {bin_width_s}")
    t_s = det["t"].astype(np.float64) * 1e-6
    idx = np.floor(t_s / bin_width_s).astype(np.int64)
    lo, hi = int(idx.min()), int(idx.max())
    n_bins = hi - lo + 1

    out = np.zeros(
        n_bins,
        dtype=[
            ("t", "f8"),
            ("mean_object", "f8"),
            ("mean_background", "f8"),
            ("n_object", "i8"),
            ("n_background", "i8"),
        ],
    )
    out["t"] = (np.arange(lo, hi + 1)) * bin_width_s
    out["mean_object"] = np.nan
    out["mean_background"] = np.nan

    is_obj = det["gt_label"] == LABEL_INDEPENDENT
    for name, mask in (("object", is_obj), ("background", ~is_obj)):
        sel = idx[mask] - lo
        sums = np.bincount(sel, weights=det["distance"][mask], minlength=n_bins)
        counts = np.bincount(sel, minlength=n_bins)
        with np.errstate(invalid="ignore"):
            out[f"mean_{name}"] = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        out[f"n_{name}"] = counts
    return out


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "mean_object", "mean_background", "n_object", "n_background"])
        for row in trace:
            writer.writerow(
                [
                    _cell(float(row["t"])),
                    _cell(float(row["mean_object"])),
                    _cell(float(row["mean_background"])),
                    int(row["n_object"]),
                    int(row["n_background"]),
                ]
            )


def export_trajectories(detections, out_dir):
    """One CSV per cluster: t, x, y, predicted label, ground-truth label.

    Files are named ``cluster_<id>_<group>.csv`` where the group tag is the
    cluster's majority ground-truth label. Returns the written paths in
    cluster-id order.
    """
    det = np.asarray(detections, dtype=DETECTION_DTYPE)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for cid in np.unique(det["cluster_id"]):
        rows = det[det["cluster_id"] == cid]
        n_obj = int((rows["gt_label"] == LABEL_INDEPENDENT).sum())
        group = "object" if 2 * n_obj > rows.shape[0] else "background"
        path = os.path.join(out_dir, f"cluster_{int(cid):05d}_{group}.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t_us", "x", "y", "label", "gt_label"])
            for r in rows:
                writer.writerow(
                    [int(r["t"]), int(r["x"]), int(r["y"]), int(r["label"]), int(r["gt_label"])]
                )
        paths.append(path)
    return paths


def write_svg_lines(path, series, title="", x_label="", y_label="", size=(640, 400)):
    """Minimal static SVG line chart: ``series`` is [(name, x array, y array)].

    NaN y-values break the polyline into segments (gaps stay gaps). This is a
    convenience for eyeballing CSV output without a plotting stack.
    """
    width, height = size
    margin = 50.0
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]

    finite = [
        (np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
        for _, x, y in series
    ]
    xs = np.concatenate([x for x, _ in finite]) if finite else np.array([0.0, 1.0])
    ys = np.concatenate([y[np.isfinite(y)] for _, y in finite]) if finite else np.array([0.0, 1.0])
    if xs.size == 0:
        xs = np.array([0.0, 1.0])
    if ys.size == 0:
        ys = np.array([0.0, 1.0])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0

    def sx(v):
        return margin + (v - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">{x_label}</text>',
        f'<text x="15" y="{height / 2}" text-anchor="middle" '
        f'transform="rotate(-90 15 {height / 2})">{y_label}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'<text x="{margin}" y="{height - margin + 15}" text-anchor="middle">{x0:.3g}</text>',
        f'<text x="{width - margin}" y="{height - margin + 15}" text-anchor="middle">{x1:.3g}</text>',
        f'<text x="{margin - 5}" y="{height - margin}" text-anchor="end">{y0:.3g}</text>',
        f'<text x="{margin - 5}" y="{margin}" text-anchor="end">{y1:.3g}</text>',
    ]
    for i, (name, x, y) in enumerate(series):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        color = palette[i % len(palette)]
        run = []
        segments = []
        for xi, yi in zip(x, y):
            if np.isfinite(yi):
                run.append(f"{sx(xi):.2f},{sy(yi):.2f}")
            elif run:
                segments.append(run)
                run = []
        if run:
            segments.append(run)
        for seg in segments:
            if len(seg) == 1:
                cx, cy = seg[0].split(",")
                parts.append(f'<circle cx="{cx}" cy="{cy}" r="1.5" fill="{color}"/>')
            else:
                parts.append(
                    f'<polyline points="{" ".join(seg)}" fill="none" stroke="{color}" '
                    f'stroke-width="1.5"/>'
                )
        parts.append(
            f'<text x="{width - margin + 5}" y="{margin + 15 * i}" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
    return path

"""Binary and CSV container formats.

Event file (``EVT0``), little-endian:
    magic ``EVT0`` | version u32 = 1 | width u32 | height u32,
    then 16-byte records: t u64 (us), x u16, y u16, polarity u8, label u8,
    reserved u16 = 0.

Flow file (``FLW0``), little-endian:
    magic ``FLW0`` | version u32 = 1,
    then 32-byte records: t u64 (us), x u16, y u16, polarity u8, label u8,
    (2 pad bytes), cluster_id u32, vx f32 (px/s), vy f32 (px/s),
    reserved u32 = 0.

Encoder CSV: header ``t_us,j0_pos_deg,j1_pos_deg,...``, one row per sample.
Velocity CSV mirrors it with ``jK_vel_degps`` columns.
Detections CSV: ``t_us,x,y,polarity,cluster_id,vx,vy,distance,label,gt_label``.

Writers emit floats with ``repr`` so every round trip is lossless and
byte-stable across runs.
"""

from __future__ import annotations

import csv

import numpy as np

from .events import EVENT_DTYPE, check_event_stream
from .exceptions import FormatError, OrderingError, TruncatedFileError

EVT_MAGIC = b"EVT0"
FLW_MAGIC = b"FLW0"
FORMAT_VERSION = 1

_EVT_RECORD = np.dtype(
    [
        ("t", "<u8"),
        ("x", "<u2"),
        ("y", "<u2"),
        ("polarity", "u1"),
        ("label", "u1"),
        ("reserved", "<u2"),
    ]
)

# The flow record carries two zero pad bytes after `label` so cluster_id and
# the f32 fields sit naturally aligned in the fixed 32-byte layout.
FLOW_DTYPE = np.dtype(
    {
        "names": ["t", "x", "y", "polarity", "label", "cluster_id", "vx", "vy"],
        "formats": ["<u8", "<u2", "<u2", "u1", "u1", "<u4", "<f4", "<f4"],
        "offsets": [0, 8, 10, 12, 13, 16, 20, 24],
        "itemsize": 32,
    }
)

DETECTION_DTYPE = np.dtype(
    [
        ("t", "<u8"),
        ("x", "<u2"),
        ("y", "<u2"),
        ("polarity", "u1"),
        ("cluster_id", "<u4"),
        ("vx", "<f4"),
        ("vy", "<f4"),
        ("distance", "<f8"),
        ("label", "u1"),
        ("gt_label", "u1"),
    ]
)


def write_event_file(path, sensor_size, events):
    """Write an EVT0 file. Events must be timestamp-ordered and in bounds."""
    events = np.asarray(events, dtype=EVENT_DTYPE)
    check_event_stream(events, sensor_size)
    records = np.zeros(events.shape[0], dtype=_EVT_RECORD)
    for name in ("t", "x", "y", "polarity", "label"):
        records[name] = events[name]
    header = EVT_MAGIC + np.array(
        [FORMAT_VERSION, sensor_size[0], sensor_size[1]], dtype="<u4"
    ).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(records.tobytes())


def read_event_file(path):
    """Read an EVT0 file; returns ((width, height), events)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 16:
        raise TruncatedFileError(f"{path}: header shorter than 16 bytes")
    if raw[:4] != EVT_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}")
    version, width, height = np.frombuffer(raw[4:16], dtype="<u4")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    body = raw[16:]
    if len(body) % _EVT_RECORD.itemsize:
        raise TruncatedFileError(f"{path}: truncated record at end of file")
    records = np.frombuffer(body, dtype=_EVT_RECORD)
    events = np.zeros(records.shape[0], dtype=EVENT_DTYPE)
    for name in ("t", "x", "y", "polarity", "label"):
        events[name] = records[name]
    check_event_stream(events, (int(width), int(height)))
    return (int(width), int(height)), events


def write_flow_file(path, flows):
    flows = np.asarray(flows, dtype=FLOW_DTYPE)
    if flows.size and np.any(np.diff(flows["t"].astype(np.int64)) < 0):
        raise OrderingError("flow records must be timestamp-ordered")
    header = FLW_MAGIC + np.array([FORMAT_VERSION], dtype="<u4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flows.tobytes())


def read_flow_file(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 8:
        raise TruncatedFileError(f"{path}: header shorter than 8 bytes")
    if raw[:4] != FLW_MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r}")
    (version,) = np.frombuffer(raw[4:8], dtype="<u4")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    body = raw[8:]
    if len(body) % FLOW_DTYPE.itemsize:
        raise TruncatedFileError(f"{path}: truncated record at end of file")
    return np.frombuffer(body, dtype=FLOW_DTYPE).copy()


def empty_flow_array(n=0):
    return np.zeros(n, dtype=FLOW_DTYPE)


def _fmt(value):
    return repr(float(value))


def write_encoder_csv(path, t_us, positions):
    """Write joint position samples as ``t_us,j0_pos_deg,...`` rows."""
    t_us = np.asarray(t_us, dtype=np.uint64)
    positions = np.atleast_2d(np.asarray(positions, dtype=np.float64))
    if positions.shape[0] != t_us.shape[0]:
        raise ValueError("t_us and positions disagree on sample count")
    joints = positions.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_us"] + [f"j{i}_pos_deg" for i in range(joints)])
        for ts, row in zip(t_us, positions):
            writer.writerow([int(ts)] + [_fmt(v) for v in row])


def read_encoder_csv(path):
    """Read an encoder CSV; returns (t_us uint64 array, positions (N, J))."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty encoder file") from None
        if not header or header[0] != "t_us":
            raise FormatError(f"{path}: expected 't_us' leading column, got {header[:1]}")
        joints = len(header) - 1
        rows = list(reader)
    t_us = np.zeros(len(rows), dtype=np.uint64)
    positions = np.zeros((len(rows), joints), dtype=np.float64)
    for i, row in enumerate(rows):
        if len(row) != joints + 1:
            raise FormatError(f"{path}: row {i + 2} has {len(row)} fields, expected {joints + 1}")
        t_us[i] = int(row[0])
        positions[i] = [float(v) for v in row[1:]]
    return t_us, positions


def write_velocity_csv(path, t_us, velocities):
    t_us = np.asarray(t_us, dtype=np.uint64)
    velocities = np.atleast_2d(np.asarray(velocities, dtype=np.float64))
    joints = velocities.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_us"] + [f"j{i}_vel_degps" for i in range(joints)])
        for ts, row in zip(t_us, velocities):
            writer.writerow([int(ts)] + [_fmt(v) for v in row])


def read_velocity_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "t_us":
            raise FormatError(f"{path}: expected 't_us' leading column")
        rows = list(reader)
    joints = len(header) - 1
    t_us = np.array([int(r[0]) for r in rows], dtype=np.uint64)
    vel = np.array([[float(v) for v in r[1:]] for r in rows], dtype=np.float64)
    return t_us, vel.reshape(len(rows), joints)


_DETECTION_COLUMNS = [
    "t_us", "x", "y", "polarity", "cluster_id", "vx", "vy",
    "distance", "label", "gt_label",
]


def write_detection_csv(path, detections):
    """Write detections; `label` is 0=ego-motion, 1=independent motion."""
    detections = np.asarray(detections, dtype=DETECTION_DTYPE)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_DETECTION_COLUMNS)
        for d in detections:
            writer.writerow(
                [
                    int(d["t"]), int(d["x"]), int(d["y"]), int(d["polarity"]),
                    int(d["cluster_id"]), _fmt(d["vx"]), _fmt(d["vy"]),
                    _fmt(d["distance"]), int(d["label"]), int(d["gt_label"]),
                ]
            )


def read_detection_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _DETECTION_COLUMNS:
            raise FormatError(f"{path}: unexpected detections header {header}")
        rows = list(reader)
    out = np.zeros(len(rows), dtype=DETECTION_DTYPE)
    for i, r in enumerate(rows):
        out[i] = (
            int(r[0]), int(r[1]), int(r[2]), int(r[3]), int(r[4]),
            np.float32(float(r[5])), np.float32(float(r[6])), float(r[7]),
            int(r[8]), int(r[9]),
        )
    return out


def file_digest(path):
    """Hex SHA-256 of a file, for reproducibility checks."""
    import hashlib

    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()

"""Shared fixtures and reference ("oracle") implementations.

The oracles here are deliberately slow and literal: plain-Python deques for
event surfaces, dense convolutions for Harris scores, two-pass statistics,
and explicit linear solves. Production code is tested against them, never
against itself.
"""

from __future__ import annotations

from collections import deque

import numpy as np
import pytest

from evimd import EVENT_DTYPE, US_PER_S

# ---------------------------------------------------------------------------
# acceptance reporting: test_acceptance.py records one line per criterion and
# the terminal summary prints them all, pass or fail, at the end of the run.

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {status} {name}: {detail}")
    assert ok, f"{name}: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"{status} {name}: {detail}")


# ---------------------------------------------------------------------------
# reference surface model: per-pixel, per-polarity deques of (x, y) pairs


class DequeSurface:
    """Literal model of the local event surface.

    Every pixel keeps one deque per polarity, holding the most recent
    ``2 * radius`` events that landed within Chebyshev distance ``radius``.
    """

    def __init__(self, sensor_size, radius):
        self.width, self.height = sensor_size
        self.radius = radius
        cap = 2 * radius
        self.queues = {
            (p, x, y): deque(maxlen=cap)
            for p in (0, 1)
            for x in range(self.width)
            for y in range(self.height)
        }

    def update(self, x, y, polarity, t):
        r = self.radius
        for qy in range(max(0, y - r), min(self.height, y + r + 1)):
            for qx in range(max(0, x - r), min(self.width, x + r + 1)):
                self.queues[(polarity, qx, qy)].append((x, y))

    def patch(self, x, y, polarity):
        r = self.radius
        side = 2 * r + 1
        out = np.zeros((side, side))
        for ex, ey in self.queues[(polarity, x, y)]:
            out[ey - y + r, ex - x + r] = 1.0
        return out

    def queue_coords(self, x, y, polarity):
        return list(self.queues[(polarity, x, y)])


# ---------------------------------------------------------------------------
# reference OLS: textbook normal-equation slope fit


def ols_slope(t_s, values):
    t = np.asarray(t_s, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    n = t.size
    st, sv = t.sum(), v.sum()
    denom = n * (t * t).sum() - st * st
    return (n * (t * v).sum() - st * sv) / denom


def ols_velocity(t_us, x, y):
    t = np.asarray(t_us, dtype=np.float64) / US_PER_S
    return ols_slope(t, x), ols_slope(t, y)


# ---------------------------------------------------------------------------
# small event-stream helpers


def events_from_rows(rows):
    """rows: iterable of (t, x, y, polarity[, label]) tuples."""
    rows = list(rows)
    out = np.zeros(len(rows), dtype=EVENT_DTYPE)
    for i, row in enumerate(rows):
        out[i]["t"] = row[0]
        out[i]["x"] = row[1]
        out[i]["y"] = row[2]
        out[i]["polarity"] = row[3]
        if len(row) > 4:
            out[i]["label"] = row[4]
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

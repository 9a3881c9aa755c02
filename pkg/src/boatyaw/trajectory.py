"""Heading from trajectory displacement under a constant-velocity model.

The comparison baseline: average the displacement vectors of the last three
positions and read the heading off the average. Fails by design for
stationary targets and for histories shorter than three points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ShortHistoryError, StationaryError
from .geometry import DEG, EARTH_RADIUS_M, GeoPoint

DEFAULT_MIN_SPEED = 0.05  # meters per frame

WINDOW_POINTS = 3


@dataclass(frozen=True)
class TrajectoryWindow:
    """Last three (frame, (east, north)) samples of one track, meters."""

    points: tuple[tuple[int, tuple[float, float]], ...]
    min_speed: float = DEFAULT_MIN_SPEED

    def __post_init__(self):
        frames = [f for f, _ in self.points]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValueError("trajectory points must be time-ordered with unique frames")
        if self.min_speed < 0.0:
            raise ValueError(f"min_speed must be non-negative, got {self.min_speed!r}")


def heading_from_trajectory(window: TrajectoryWindow) -> float:
    """Compass heading (degrees from north, [0, 360)) of the average velocity.

    Raises ShortHistoryError with fewer than three points and StationaryError
    when the mean per-frame displacement falls below ``min_speed``.
    """
    pts = window.points
    if len(pts) < WINDOW_POINTS:
        raise ShortHistoryError(
            f"need {WINDOW_POINTS} trajectory points, have {len(pts)}"
        )
    pts = pts[-WINDOW_POINTS:]
    ve = 0.0
    vn = 0.0
    for (f0, (e0, n0)), (f1, (e1, n1)) in zip(pts, pts[1:]):
        df = f1 - f0
        ve += (e1 - e0) / df
        vn += (n1 - n0) / df
    ve /= WINDOW_POINTS - 1
    vn /= WINDOW_POINTS - 1
    if math.hypot(ve, vn) < window.min_speed:
        raise StationaryError(
            f"mean speed {math.hypot(ve, vn):.4g} m/frame below {window.min_speed}"
        )
    return math.degrees(math.atan2(ve, vn)) % 360.0


def geo_to_local(points, ref: GeoPoint, radius: float = EARTH_RADIUS_M):
    """Convert (frame, GeoPoint) samples to (frame, (east, north)) meters.

    Uses the same flat-plane scaling as the GPS mapping, anchored at ``ref``.
    """
    cos_lat = math.cos(ref.lat * DEG)
    out = []
    for frame, geo in points:
        east = (geo.lon - ref.lon) * DEG * radius * cos_lat
        north = (geo.lat - ref.lat) * DEG * radius
        out.append((frame, (east, north)))
    return out

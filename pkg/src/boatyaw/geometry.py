"""Camera-relative to world-frame conversions.

Pixel coordinates follow image convention (origin top-left, v down). Ground
coordinates are meters on the flat water plane: x to the camera's right and
y forward before heading rotation, east/north after. Headings are degrees
clockwise from true north at the I/O boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import HorizonError

EARTH_RADIUS_M = 6371008.8

DEG = math.pi / 180.0

# Latitudes beyond this make the longitude cosine scaling unreliable.
MAX_ABS_LAT_DEG = 89.0


@dataclass(frozen=True)
class CameraPose:
    """Georeferenced camera metadata driving all projections.

    pitch_deg is measured below horizontal: 0 = level, 90 = nadir. alt_m is
    height above the water plane.
    """

    lat: float
    lon: float
    alt_m: float
    heading_deg: float
    pitch_deg: float
    roll_deg: float
    f_px: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"lat must be in [-90, 90], got {self.lat!r}")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"lon must be in [-180, 180], got {self.lon!r}")
        if not self.alt_m > 0.0:
            raise ValueError(f"alt_m must be positive, got {self.alt_m!r}")
        if not 0.0 < self.pitch_deg <= 90.0:
            raise ValueError(f"pitch_deg must be in (0, 90], got {self.pitch_deg!r}")
        if not self.f_px > 0.0:
            raise ValueError(f"f_px must be positive, got {self.f_px!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "CameraPose":
        required = ["lat", "lon", "alt_m", "heading_deg", "pitch_deg", "roll_deg",
                    "f_px", "cx", "cy", "width", "height"]
        missing = [k for k in required if k not in d]
        if missing:
            raise ValueError(f"camera metadata missing keys: {missing}")
        return cls(**{k: d[k] for k in required})

    def to_dict(self) -> dict:
        return {
            "lat": self.lat, "lon": self.lon, "alt_m": self.alt_m,
            "heading_deg": self.heading_deg, "pitch_deg": self.pitch_deg,
            "roll_deg": self.roll_deg, "f_px": self.f_px,
            "cx": self.cx, "cy": self.cy,
            "width": self.width, "height": self.height,
        }


@dataclass(frozen=True)
class GroundPoint:
    x: float
    y: float


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float


def rotate_relative(p: GroundPoint, theta_deg: float) -> GroundPoint:
    """Rotate relative ground coordinates by the camera heading angle."""
    th = theta_deg * DEG
    ct, st = math.cos(th), math.sin(th)
    return GroundPoint(ct * p.x - st * p.y, st * p.x + ct * p.y)


def relative_to_gps(cam: CameraPose, p_rotated: GroundPoint,
                    radius: float = EARTH_RADIUS_M) -> GeoPoint:
    """Offset the camera's GPS position by rotated ground coordinates.

    y_r moves latitude, x_r moves longitude with the 1/cos(lat) correction.
    """
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    if abs(cam.lat) >= MAX_ABS_LAT_DEG:
        raise ValueError(
            f"latitude {cam.lat} too close to a pole for the flat-plane mapping"
        )
    la = cam.lat + (p_rotated.y / radius) * (180.0 / math.pi)
    lo = cam.lon + (p_rotated.x / radius) * (180.0 / math.pi) / math.cos(cam.lat * DEG)
    return GeoPoint(la, lo)


def gps_to_relative(cam: CameraPose, geo: GeoPoint,
                    radius: float = EARTH_RADIUS_M) -> GroundPoint:
    """Inverse of relative_to_gps: GPS position back to rotated ground meters."""
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius!r}")
    if abs(cam.lat) >= MAX_ABS_LAT_DEG:
        raise ValueError(
            f"latitude {cam.lat} too close to a pole for the flat-plane mapping"
        )
    y_r = (geo.lat - cam.lat) * DEG * radius
    x_r = (geo.lon - cam.lon) * DEG * radius * math.cos(cam.lat * DEG)
    return GroundPoint(x_r, y_r)


def roll_correction(u: float, v: float, roll_deg: float,
                    cx: float, cy: float) -> tuple[float, float]:
    """Rotate a pixel about the principal point by -roll (horizon levelling)."""
    if not (math.isfinite(u) and math.isfinite(v) and math.isfinite(roll_deg)):
        raise ValueError("pixel coordinates and roll must be finite")
    th = -roll_deg * DEG
    ct, st = math.cos(th), math.sin(th)
    du, dv = u - cx, v - cy
    return cx + ct * du - st * dv, cy + st * du + ct * dv


def pixel_to_ground(cam: CameraPose, u: float, v: float) -> GroundPoint:
    """Intersect a pixel's back-projected ray with the water plane.

    Returns meters (x right, y forward) in the camera-heading frame. Raises
    HorizonError when the ray points at or above the horizon; near-horizon
    rays intersect arbitrarily far away, so small pixel errors there produce
    large ground errors.
    """
    ur, vr = roll_correction(u, v, cam.roll_deg, cam.cx, cam.cy)
    beta = cam.pitch_deg * DEG
    sb, cb = math.sin(beta), math.cos(beta)
    a = (ur - cam.cx) / cam.f_px
    b = (vr - cam.cy) / cam.f_px
    # Camera basis in the heading frame: right, forward (pitched down by
    # beta), and image-down.
    dx = a
    dy = cb - b * sb
    dz = -sb - b * cb
    if dz >= 0.0:
        raise HorizonError(
            f"pixel ({u}, {v}) back-projects at or above the horizon"
        )
    s = cam.alt_m / -dz
    return GroundPoint(s * dx, s * dy)


def ground_to_pixel(cam: CameraPose, p: GroundPoint) -> tuple[float, float]:
    """Forward projection of a water-plane point into the image.

    Inverse of pixel_to_ground; raises HorizonError for points at or behind
    the camera plane.
    """
    beta = cam.pitch_deg * DEG
    sb, cb = math.sin(beta), math.cos(beta)
    c = p.y * cb + cam.alt_m * sb
    if c <= 0.0:
        raise HorizonError("ground point projects behind the camera")
    a = p.x
    b = -p.y * sb + cam.alt_m * cb
    u0 = cam.cx + cam.f_px * a / c
    v0 = cam.cy + cam.f_px * b / c
    return roll_correction(u0, v0, -cam.roll_deg, cam.cx, cam.cy)


def relative_to_absolute_heading(theta_cam_deg: float, yaw_rel_deg: float) -> float:
    """Map camera-relative yaw to compass heading.

    At relative yaw 0 the bow faces the camera, so the boat heads opposite
    the camera heading.
    """
    if not (math.isfinite(theta_cam_deg) and math.isfinite(yaw_rel_deg)):
        raise ValueError("angles must be finite")
    return (theta_cam_deg + 180.0 + yaw_rel_deg) % 360.0


def absolute_to_relative_yaw(theta_cam_deg: float, heading_deg: float) -> float:
    """Inverse of relative_to_absolute_heading."""
    if not (math.isfinite(theta_cam_deg) and math.isfinite(heading_deg)):
        raise ValueError("angles must be finite")
    return (heading_deg - theta_cam_deg - 180.0) % 360.0

"""Minimal IoU tracker binding detection streams to per-tracklet fusion.

Greedy association is deterministic: candidate pairs are ranked by descending
IoU with ties broken by lower track id, then lower detection index. Track ids
increase monotonically and are never reused; a closed track's fusion state is
discarded, so a re-detected object starts from scratch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import fusion
from .distribution import PoseDistribution, entropy, mode
from .errors import GridMismatchError, HorizonError, ShortHistoryError, StationaryError
from .geometry import (
    EARTH_RADIUS_M,
    CameraPose,
    GeoPoint,
    absolute_to_relative_yaw,
    pixel_to_ground,
    relative_to_absolute_heading,
    relative_to_gps,
    rotate_relative,
)
from .trajectory import (
    DEFAULT_MIN_SPEED,
    WINDOW_POINTS,
    TrajectoryWindow,
    geo_to_local,
    heading_from_trajectory,
)

Bbox = tuple[float, float, float, float]  # x_min, y_min, width, height

METHODS = ("single", "mode-mean", "dist-mean", "trajectory")

DEFAULT_IOU_THRESHOLD = 0.3
DEFAULT_MAX_AGE = 30


def iou(a: Bbox, b: Bbox) -> float:
    """Intersection over union of two (x, y, w, h) boxes; 0 when disjoint."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    if aw <= 0 or ah <= 0 or bw <= 0 or bh <= 0:
        raise ValueError("boxes must have positive width and height")
    ix = max(0.0, min(ax + aw, bx + bw) - max(ax, bx))
    iy = max(0.0, min(ay + ah, by + bh) - max(ay, by))
    inter = ix * iy
    if inter <= 0.0:
        return 0.0
    return inter / (aw * ah + bw * bh - inter)


@dataclass
class Detection:
    frame: int
    bbox: Bbox
    score: float = 1.0
    orientation: PoseDistribution | None = None


@dataclass
class Track:
    id: int
    last_bbox: Bbox
    fusion: fusion.FusionState | None = None
    misses: int = 0
    trajectory: list[tuple[int, GeoPoint]] = field(default_factory=list)


def associate(tracks, detections, iou_threshold: float = DEFAULT_IOU_THRESHOLD):
    """Greedy IoU matching.

    Returns (matches, unmatched_track_indices, unmatched_detection_indices)
    where matches pairs track indices with detection indices. Pairs below the
    threshold never match.
    """
    pairs = []
    for ti, trk in enumerate(tracks):
        for di, det in enumerate(detections):
            v = iou(trk.last_bbox, det.bbox)
            if v >= iou_threshold:
                pairs.append((-v, trk.id, di, ti))
    pairs.sort()
    used_t = set()
    used_d = set()
    matches = []
    for _, _, di, ti in pairs:
        if ti in used_t or di in used_d:
            continue
        used_t.add(ti)
        used_d.add(di)
        matches.append((ti, di))
    unmatched_tracks = [ti for ti in range(len(tracks)) if ti not in used_t]
    unmatched_dets = [di for di in range(len(detections)) if di not in used_d]
    return matches, unmatched_tracks, unmatched_dets


@dataclass
class TrackOutput:
    """Per-track, per-frame pipeline result (degrees at the boundary)."""

    frame: int
    track_id: int
    bbox: Bbox
    yaw_rel_deg: float | None
    heading_abs_deg: float | None
    lat: float | None
    lon: float | None
    entropy: float | None
    flip_flagged: bool

    def to_record(self) -> dict:
        return {
            "frame": self.frame,
            "id": self.track_id,
            "bbox": list(self.bbox),
            "yaw_rel_deg": self.yaw_rel_deg,
            "heading_abs_deg": self.heading_abs_deg,
            "lat": self.lat,
            "lon": self.lon,
            "entropy": self.entropy,
            "flip_flagged": self.flip_flagged,
        }


class TrackingPipeline:
    """Detect -> track -> fuse -> geolocate, one frame at a time.

    ``method`` selects what yaw_rel_deg carries: the raw per-frame mode
    ("single"), a circular running mean of recent modes ("mode-mean"), the
    fused posterior's mode ("dist-mean", default), or the displacement heading
    of the track's geolocated path ("trajectory", None while undefined).

    Geolocation anchors at the bbox bottom center (waterline contact); the
    trajectory window uses the bbox center.
    """

    def __init__(
        self,
        camera: CameraPose,
        fusion_params: fusion.FusionParams | None = None,
        iou_threshold: float = DEFAULT_IOU_THRESHOLD,
        max_age: int = DEFAULT_MAX_AGE,
        method: str = "dist-mean",
        earth_radius: float = EARTH_RADIUS_M,
        min_speed: float = DEFAULT_MIN_SPEED,
    ):
        if method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {method!r}")
        if max_age < 1:
            raise ValueError(f"max_age must be positive, got {max_age!r}")
        self.camera = camera
        self.params = fusion_params or fusion.FusionParams()
        self.iou_threshold = iou_threshold
        self.max_age = max_age
        self.method = method
        self.earth_radius = earth_radius
        self.min_speed = min_speed
        self.tracks: list[Track] = []
        self._next_id = 0
        self._grid_cells: int | None = None

    def _geolocate(self, u: float, v: float) -> GeoPoint | None:
        try:
            ground = pixel_to_ground(self.camera, u, v)
        except HorizonError:
            return None
        rotated = rotate_relative(ground, self.camera.heading_deg)
        return relative_to_gps(self.camera, rotated, self.earth_radius)

    def _advance_fusion(self, track: Track, det: Detection) -> bool:
        obs = det.orientation
        if obs is None:
            return False
        if self._grid_cells is None:
            self._grid_cells = obs.grid.n_cells
        elif obs.grid.n_cells != self._grid_cells:
            raise GridMismatchError(
                f"stream switched from {self._grid_cells}-cell to "
                f"{obs.grid.n_cells}-cell distributions at frame {det.frame}"
            )
        if track.fusion is None:
            track.fusion = fusion.init(obs, self.params)
            return False
        track.fusion, _, flagged = fusion.step(track.fusion, obs, self.params)
        return flagged

    def _method_yaw(self, track: Track) -> float | None:
        st = track.fusion
        if self.method == "trajectory":
            if len(track.trajectory) < WINDOW_POINTS:
                return None
            local = geo_to_local(
                track.trajectory[-WINDOW_POINTS:],
                GeoPoint(self.camera.lat, self.camera.lon),
                self.earth_radius,
            )
            window = TrajectoryWindow(tuple(local), min_speed=self.min_speed)
            try:
                heading = heading_from_trajectory(window)
            except (StationaryError, ShortHistoryError):
                return None
            return absolute_to_relative_yaw(self.camera.heading_deg, heading)
        if st is None:
            return None
        if self.method == "single":
            return math.degrees(st.raw_modes[-1]) % 360.0
        if self.method == "mode-mean":
            try:
                mean = fusion.mode_running_mean(st.raw_modes, self.params.k)
            except ValueError:
                return None
            return math.degrees(mean) % 360.0
        return math.degrees(mode(st.fused)[0]) % 360.0

    def _emit(self, track: Track, det: Detection, flagged: bool) -> TrackOutput:
        x, y, w, h = det.bbox
        bottom = self._geolocate(x + w / 2.0, y + h)
        center = self._geolocate(x + w / 2.0, y + h / 2.0)
        if center is not None:
            track.trajectory.append((det.frame, center))
        yaw = self._method_yaw(track)
        heading = (
            relative_to_absolute_heading(self.camera.heading_deg, yaw)
            if yaw is not None
            else None
        )
        ent = entropy(track.fusion.fused) if track.fusion is not None else None
        return TrackOutput(
            frame=det.frame,
            track_id=track.id,
            bbox=det.bbox,
            yaw_rel_deg=yaw,
            heading_abs_deg=heading,
            lat=None if bottom is None else bottom.lat,
            lon=None if bottom is None else bottom.lon,
            entropy=ent,
            flip_flagged=flagged,
        )

    def step_frame(self, detections: list[Detection]) -> list[TrackOutput]:
        """Advance one frame; returns outputs for every matched or new track."""
        matches, unmatched_tracks, unmatched_dets = associate(
            self.tracks, detections, self.iou_threshold
        )
        outputs = []
        for ti, di in matches:
            track = self.tracks[ti]
            det = detections[di]
            track.misses = 0
            track.last_bbox = det.bbox
            flagged = self._advance_fusion(track, det)
            outputs.append(self._emit(track, det, flagged))
        survivors = [self.tracks[ti] for ti, _ in matches]
        for ti in unmatched_tracks:
            track = self.tracks[ti]
            track.misses += 1
            if track.misses < self.max_age:
                survivors.append(track)
        for di in unmatched_dets:
            det = detections[di]
            track = Track(id=self._next_id, last_bbox=det.bbox)
            self._next_id += 1
            self._advance_fusion(track, det)
            survivors.append(track)
            outputs.append(self._emit(track, det, False))
        survivors.sort(key=lambda t: t.id)
        self.tracks = survivors
        outputs.sort(key=lambda o: o.track_id)
        return outputs

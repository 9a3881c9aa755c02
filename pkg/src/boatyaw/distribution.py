"""Probability distributions over the orientation grid.

A PoseDistribution is a normalized, non-negative vector with one entry per
grid cell. Values are immutable; every operation returns fresh data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistributionError, UndefinedMeanError
from .grid import TWO_PI, OrientationGrid

PROB_SUM_TOL = 1e-9

# Half-width of the antipodal window used by flip_score: half of the 30 deg
# accuracy tolerance used in evaluation.
FLIP_WINDOW_RAD = math.radians(15.0)


@dataclass(frozen=True, eq=False)
class PoseDistribution:
    grid: OrientationGrid
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=np.float64)
        if p.shape != (self.grid.n_cells,):
            raise ValueError(
                f"probs must have length {self.grid.n_cells}, got shape {p.shape}"
            )
        if not np.all(np.isfinite(p)):
            raise ValueError("probs must be finite")
        if np.any(p < 0.0):
            raise ValueError("probs must be non-negative")
        s = float(p.sum())
        if abs(s - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probs must sum to 1 within {PROB_SUM_TOL}, got {s!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


def from_logits(grid: OrientationGrid, logits) -> PoseDistribution:
    """Softmax of raw per-cell scores, max-subtracted for stability."""
    x = np.asarray(logits, dtype=np.float64)
    if x.shape != (grid.n_cells,):
        raise ValueError(f"logits must have length {grid.n_cells}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("logits must be finite")
    z = np.exp(x - x.max())
    return PoseDistribution(grid, z / z.sum())


def normalize(grid: OrientationGrid, values) -> PoseDistribution:
    """Scale a non-negative vector to sum to 1.

    Raises DegenerateDistributionError when every entry is zero; callers that
    can fall back (fusion) catch this.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.shape != (grid.n_cells,):
        raise ValueError(f"values must have length {grid.n_cells}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    if np.any(v < 0.0):
        raise ValueError("values must be non-negative")
    s = float(v.sum())
    if s <= 0.0:
        raise DegenerateDistributionError("cannot normalize an all-zero vector")
    return PoseDistribution(grid, v / s)


def uniform(grid: OrientationGrid) -> PoseDistribution:
    return PoseDistribution(grid, np.full(grid.n_cells, 1.0 / grid.n_cells))


def mode(d: PoseDistribution) -> tuple[float, float]:
    """Refined mode: (yaw radians in [0, 2*pi), probability of the argmax cell).

    A parabola is fit through the log-probabilities of the argmax cell and its
    two circular neighbors; the vertex offset is clamped to half a cell width.
    Ties on the raw argmax break toward the lower index. Degenerate neighbor
    log-probabilities (zeros, flat tops) leave the cell center unrefined.
    """
    p = d.probs
    n = d.grid.n_cells
    j = int(np.argmax(p))
    p0 = float(p[j])
    pm = float(p[(j - 1) % n])
    pp = float(p[(j + 1) % n])
    offset = 0.0
    if pm > 0.0 and pp > 0.0 and p0 > 0.0:
        ym = math.log(pm)
        y0 = math.log(p0)
        yp = math.log(pp)
        denom = ym - 2.0 * y0 + yp
        if denom != 0.0 and math.isfinite(denom):
            offset = (ym - yp) / (2.0 * denom)
            offset = max(-0.5, min(0.5, offset))
    yaw = (d.grid.cell_centers[j] + offset * d.grid.cell_width) % TWO_PI
    return yaw, p0


def circular_mean(d: PoseDistribution) -> float:
    """Direction of the probability-weighted resultant vector, in [0, 2*pi)."""
    c = float(np.dot(d.probs, np.cos(d.grid.cell_centers)))
    s = float(np.dot(d.probs, np.sin(d.grid.cell_centers)))
    if math.hypot(s, c) <= 1e-9:
        raise UndefinedMeanError("resultant vector too short; circular mean undefined")
    return math.atan2(s, c) % TWO_PI


def flip_score(d: PoseDistribution, window: float = FLIP_WINDOW_RAD) -> float:
    """Probability mass within ``window`` radians of the mode's antipode.

    Quantifies 180 deg (fore-aft symmetry) ambiguity: 0 for a clean unimodal
    distribution, 0.5 for an even two-way split.
    """
    yaw, _ = mode(d)
    anti = (yaw + math.pi) % TWO_PI
    diff = np.abs(d.grid.cell_centers - anti) % TWO_PI
    diff = np.minimum(diff, TWO_PI - diff)
    return float(d.probs[diff <= window + 1e-12].sum())


def entropy(d: PoseDistribution) -> float:
    """Shannon entropy in nats, with 0*log(0) = 0."""
    p = d.probs[d.probs > 0.0]
    return float(-np.dot(p, np.log(p)))


def rotated(d: PoseDistribution, shift: int) -> PoseDistribution:
    """Distribution with its mass rotated by ``shift`` cells (positive = ccw)."""
    return PoseDistribution(d.grid, np.roll(d.probs, shift))


def to_payload(d: PoseDistribution) -> dict:
    """JSON-ready representation: {"n_cells": ..., "probs": [...]}."""
    return {"n_cells": d.grid.n_cells, "probs": [float(x) for x in d.probs]}


def from_payload(record: dict, grid: OrientationGrid | None = None) -> PoseDistribution:
    """Parse {"n_cells", "probs"|"logits"} (exactly one of the two keys).

    When ``grid`` is given its size must match the record; otherwise a grid of
    the recorded size is built.
    """
    if "n_cells" not in record:
        raise ValueError("distribution record missing 'n_cells'")
    n = record["n_cells"]
    if grid is None:
        grid = OrientationGrid(int(n))
    elif grid.n_cells != n:
        raise ValueError(f"record n_cells {n} does not match grid {grid.n_cells}")
    has_probs = "probs" in record
    has_logits = "logits" in record
    if has_probs == has_logits:
        raise ValueError("distribution record needs exactly one of 'probs' or 'logits'")
    if has_probs:
        return normalize(grid, record["probs"])
    return from_logits(grid, record["logits"])

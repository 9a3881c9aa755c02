"""Uniform discretization of the yaw circle.

All orientation distributions in this package live on an OrientationGrid:
``n_cells`` equal-measure cells covering [0, 2*pi), centers offset by half a
cell width so that 0 rad falls on a cell boundary. Angles are radians
throughout; degrees appear only at I/O boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

MIN_CELLS = 4


@dataclass(frozen=True, eq=False)
class OrientationGrid:
    """Equal-width partition of the yaw circle.

    cell_centers[i] = (i + 0.5) * cell_width, strictly increasing, in [0, 2*pi).
    """

    n_cells: int
    cell_width: float = field(init=False)
    cell_centers: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.n_cells, (int, np.integer)) or isinstance(self.n_cells, bool):
            raise ValueError(f"n_cells must be an integer, got {self.n_cells!r}")
        if self.n_cells < MIN_CELLS:
            raise ValueError(f"n_cells must be >= {MIN_CELLS}, got {self.n_cells}")
        width = TWO_PI / self.n_cells
        object.__setattr__(self, "cell_width", width)
        centers = (np.arange(self.n_cells) + 0.5) * width
        centers.setflags(write=False)
        object.__setattr__(self, "cell_centers", centers)

    def __eq__(self, other) -> bool:
        return isinstance(other, OrientationGrid) and other.n_cells == self.n_cells

    def __hash__(self) -> int:
        return hash(("OrientationGrid", self.n_cells))


def make_grid(n_cells: int) -> OrientationGrid:
    """Build a uniform grid with ``n_cells`` cells (at least 4)."""
    return OrientationGrid(int(n_cells))


def geodesic_distance(a: float, b: float) -> float:
    """Shortest arc between two yaw angles, in [0, pi].

    Symmetric, zero iff the angles are equal mod 2*pi.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"angles must be finite, got {a!r}, {b!r}")
    d = abs(a - b) % TWO_PI
    return min(d, TWO_PI - d)


def nearest_cell(grid: OrientationGrid, yaw: float) -> int:
    """Index of the cell center closest to ``yaw`` (reduced mod 2*pi).

    Ties (yaw exactly on a cell boundary) break toward the lower index.
    """
    if not math.isfinite(yaw):
        raise ValueError(f"yaw must be finite, got {yaw!r}")
    n = grid.n_cells
    r = yaw % TWO_PI
    i = int(r // grid.cell_width)
    if i >= n:
        i = n - 1
    # Float floor-division can land one off near a boundary; decide among the
    # containing cell and both neighbors, lowest index winning exact ties.
    candidates = sorted({(i - 1) % n, i, (i + 1) % n})
    dists = [geodesic_distance(grid.cell_centers[c], r) for c in candidates]
    dmin = min(dists)
    for c, d in zip(candidates, dists):
        if d == dmin:
            return c
    raise AssertionError("unreachable")

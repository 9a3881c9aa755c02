"""Per-tracklet temporal fusion of orientation distributions.

The fused posterior is advanced additively: each step adds a weighted running
average of recent frame-to-frame distribution differences, clamps negatives,
and renormalizes. A flip gate detects near-antipodal outlier observations
(fore-aft symmetry misses) and corrects or drops them before fusion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .distribution import PoseDistribution, mode
from .errors import GridMismatchError, UndefinedMeanError
from .grid import TWO_PI, geodesic_distance

FUSION_MODES = ("convex", "literal")
FLIP_POLICIES = ("correct", "drop")

DEFAULT_FLIP_GATE_THRESHOLD = 2.0 * math.pi / 3.0


@dataclass(frozen=True)
class FusionParams:
    """Window length ``k``, zero-weight prefix ``t`` (0 <= t < k), flip gate.

    mode "convex" treats the difference weights as a convex combination;
    "literal" additionally applies the 1/k prefactor, reproducing the
    non-convex printed form of the update.
    """

    k: int = 3
    t: int = 1
    flip_gate_threshold: float = DEFAULT_FLIP_GATE_THRESHOLD
    mode: str = "convex"
    flip_policy: str = "correct"
    flip_ref_window: int = 25

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if not isinstance(self.t, int) or not (0 <= self.t < self.k):
            raise ValueError(f"t must satisfy 0 <= t < k, got t={self.t!r}, k={self.k}")
        if not (0.0 < self.flip_gate_threshold <= math.pi):
            raise ValueError(
                f"flip_gate_threshold must be in (0, pi], got {self.flip_gate_threshold!r}"
            )
        if self.mode not in FUSION_MODES:
            raise ValueError(f"mode must be one of {FUSION_MODES}, got {self.mode!r}")
        if self.flip_policy not in FLIP_POLICIES:
            raise ValueError(
                f"flip_policy must be one of {FLIP_POLICIES}, got {self.flip_policy!r}"
            )
        if not isinstance(self.flip_ref_window, int) or self.flip_ref_window < 1:
            raise ValueError(
                f"flip_ref_window must be a positive integer, got {self.flip_ref_window!r}"
            )


@dataclass(frozen=True)
class FusionState:
    """Sliding window of accepted distributions plus the current posterior.

    ``raw_modes`` keeps the point estimates of the most recent observations
    before any flip correction; they anchor the flip gate's reference
    direction. States are immutable; step() returns the successor.
    """

    history: tuple[PoseDistribution, ...]
    fused: PoseDistribution
    frames_seen: int
    flips_rejected: int
    raw_modes: tuple[float, ...] = field(default=())


def init(first: PoseDistribution, params: FusionParams) -> FusionState:
    """Start a tracklet's fusion state from its first observation."""
    return FusionState(
        history=(first,),
        fused=first,
        frames_seen=1,
        flips_rejected=0,
        raw_modes=(mode(first)[0],),
    )


def weights(params: FusionParams) -> np.ndarray:
    """Difference weights: zero for the first ``t`` slots, equal afterwards."""
    w = np.zeros(params.k)
    w[params.t:] = 1.0 / (params.k - params.t)
    return w


def circular_mean_of(angles) -> float:
    """Resultant-vector mean of a sequence of angles, in [0, 2*pi)."""
    s = 0.0
    c = 0.0
    n = 0
    for a in angles:
        s += math.sin(a)
        c += math.cos(a)
        n += 1
    if n == 0:
        raise ValueError("need at least one angle")
    if math.hypot(s, c) <= 1e-9 * n:
        raise UndefinedMeanError("resultant vector too short; circular mean undefined")
    return math.atan2(s, c) % TWO_PI


def mode_running_mean(modes, window: int) -> float:
    """Circular mean of the last ``window`` point estimates."""
    if not isinstance(window, int) or window < 1:
        raise ValueError(f"window must be a positive integer, got {window!r}")
    seq = list(modes)
    if not seq:
        raise ValueError("need at least one mode")
    return circular_mean_of(seq[-window:])


def _gate_reference(state: FusionState) -> float:
    """Direction new observations are compared against.

    The running circular mean of recent raw observation modes follows the
    majority of the stream, so a tracklet that happens to start on a flipped
    frame cannot lock the gate onto the wrong side.
    """
    try:
        return circular_mean_of(state.raw_modes)
    except UndefinedMeanError:
        return mode(state.fused)[0]


def step(
    state: FusionState, observed: PoseDistribution, params: FusionParams
) -> tuple[FusionState, PoseDistribution, bool]:
    """Advance one frame; returns (next state, posterior, flip-flagged).

    The observation is flagged when its mode deviates from the reference by
    more than the gate threshold while its antipode falls within it. Flagged
    observations are rotated by half a turn (policy "correct") or left out of
    the buffer entirely (policy "drop") before the additive update.
    """
    if observed.grid != state.fused.grid:
        raise GridMismatchError(
            f"observation grid ({observed.grid.n_cells} cells) does not match "
            f"state grid ({state.fused.grid.n_cells} cells)"
        )
    n = observed.grid.n_cells
    obs_mode = mode(observed)[0]
    ref = _gate_reference(state)
    dev = geodesic_distance(obs_mode, ref)
    anti_dev = geodesic_distance((obs_mode + math.pi) % TWO_PI, ref)
    flagged = dev > params.flip_gate_threshold and anti_dev <= params.flip_gate_threshold

    raw_modes = (state.raw_modes + (obs_mode,))[-params.flip_ref_window:]

    if flagged and params.flip_policy == "drop":
        next_state = replace(
            state,
            frames_seen=state.frames_seen + 1,
            flips_rejected=state.flips_rejected + 1,
            raw_modes=raw_modes,
        )
        return next_state, state.fused, True

    if flagged:
        observed = PoseDistribution(observed.grid, np.roll(observed.probs, n // 2))

    history = (state.history + (observed,))[-(params.k + 1):]
    m = len(history) - 1
    if m < 1:
        posterior = observed
    else:
        w_full = weights(params)
        w_part = w_full[params.k - m:]
        if params.mode == "convex":
            w_part = w_part / w_part.sum()
        else:
            w_part = w_part / params.k
        delta = np.zeros(n)
        for l in range(m):
            delta += w_part[l] * (history[l + 1].probs - history[l].probs)
        raw = state.fused.probs + delta
        np.clip(raw, 0.0, None, out=raw)
        total = raw.sum()
        if total <= 0.0:
            posterior = observed
        else:
            posterior = PoseDistribution(observed.grid, raw / total)

    next_state = FusionState(
        history=history,
        fused=posterior,
        frames_seen=state.frames_seen + 1,
        flips_rejected=state.flips_rejected + (1 if flagged else 0),
        raw_modes=raw_modes,
    )
    return next_state, posterior, flagged

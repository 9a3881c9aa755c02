"""Accuracy / median-error metrics and multi-method comparison tables.

Predictions are matched to ground truth per frame, by bounding-box overlap
when the ground truth carries boxes (tracker ids are not ground-truth ids)
and by id equality otherwise. Only ground truth matched in every compared
stream is scored, so all method rows share one denominator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SchemaError
from .grid import geodesic_distance
from .tracking import iou

UNDEFINED_POLICIES = ("penalty", "skip")

GT_MATCH_IOU = 0.5


@dataclass(frozen=True)
class EvalRecord:
    frame: int
    track_id: int
    method: str
    pred_yaw: float | None  # radians; None = method had no defined estimate
    gt_yaw: float  # radians
    error: float  # radians in [0, pi]


def _record(frame, track_id, method, pred_yaw, gt_yaw, policy) -> EvalRecord | None:
    if pred_yaw is None:
        if policy == "skip":
            return None
        err = math.pi
    else:
        err = geodesic_distance(pred_yaw, gt_yaw)
    return EvalRecord(frame, track_id, method, pred_yaw, gt_yaw, err)


def acc_at(records, threshold_deg: float = 30.0) -> float:
    """Percentage of records with geodesic error at most ``threshold_deg``."""
    recs = list(records)
    if not recs:
        raise ValueError("need at least one record")
    thr = math.radians(threshold_deg)
    hits = sum(1 for r in recs if r.error <= thr)
    return 100.0 * hits / len(recs)


def median_error(records) -> float:
    """Median geodesic error in degrees; even counts average the middle pair."""
    errs = sorted(math.degrees(r.error) for r in records)
    if not errs:
        raise ValueError("need at least one record")
    n = len(errs)
    mid = n // 2
    if n % 2 == 1:
        return errs[mid]
    return 0.5 * (errs[mid - 1] + errs[mid])


def match_predictions(pred_records, gt_records):
    """Map (frame, gt id) -> prediction record.

    Prediction records are output-stream dicts; ground truth dicts carry at
    least frame, id, yaw_rel_deg and optionally bbox. With boxes present,
    matching is greedy best-IoU per frame at a 0.5 floor.
    """
    preds_by_frame: dict[int, list[dict]] = {}
    for p in pred_records:
        preds_by_frame.setdefault(p["frame"], []).append(p)
    matched: dict[tuple[int, int], dict] = {}
    gts_by_frame: dict[int, list[dict]] = {}
    for g in gt_records:
        gts_by_frame.setdefault(g["frame"], []).append(g)
    for frame, gts in gts_by_frame.items():
        preds = preds_by_frame.get(frame, [])
        if not preds:
            continue
        use_boxes = all(g.get("bbox") for g in gts) and all(p.get("bbox") for p in preds)
        if use_boxes:
            pairs = []
            for gi, g in enumerate(gts):
                for pi, p in enumerate(preds):
                    v = iou(tuple(g["bbox"]), tuple(p["bbox"]))
                    if v >= GT_MATCH_IOU:
                        pairs.append((-v, gi, pi))
            pairs.sort()
            used_g, used_p = set(), set()
            for _, gi, pi in pairs:
                if gi in used_g or pi in used_p:
                    continue
                used_g.add(gi)
                used_p.add(pi)
                matched[(frame, gts[gi]["id"])] = preds[pi]
        else:
            by_id = {p["id"]: p for p in preds}
            for g in gts:
                if g["id"] in by_id:
                    matched[(frame, g["id"])] = by_id[g["id"]]
    return matched


def compare(
    streams: dict[str, list[dict]],
    gt_records: list[dict],
    methods=None,
    policy: str = "penalty",
    threshold_deg: float = 30.0,
):
    """One (method, Acc, ME, n) row per method over an identical record set.

    ``streams`` maps method name to its output records. Ground truth that is
    unmatched in any stream is excluded from every row.
    """
    if policy not in UNDEFINED_POLICIES:
        raise ValueError(f"policy must be one of {UNDEFINED_POLICIES}, got {policy!r}")
    if methods is None:
        methods = list(streams)
    unknown = [m for m in methods if m not in streams]
    if unknown:
        raise ValueError(f"no stream provided for methods: {unknown}")
    if not gt_records:
        raise ValueError("ground truth is empty")

    gt_by_key = {(g["frame"], g["id"]): g for g in gt_records}
    matched = {m: match_predictions(streams[m], gt_records) for m in methods}
    common = set(gt_by_key)
    for m in methods:
        common &= set(matched[m])
    if not common:
        raise SchemaError("no ground-truth records match any prediction stream")

    rows = []
    for m in methods:
        records = []
        for key in sorted(common):
            gt = gt_by_key[key]
            pred = matched[m][key]
            yaw = pred.get("yaw_rel_deg")
            rec = _record(
                key[0],
                key[1],
                m,
                None if yaw is None else math.radians(yaw),
                math.radians(gt["yaw_rel_deg"]),
                policy,
            )
            if rec is not None:
                records.append(rec)
        rows.append(
            {
                "method": m,
                "acc": acc_at(records, threshold_deg),
                "me": median_error(records),
                "n": len(records),
            }
        )
    return rows


def format_table(rows) -> str:
    """Aligned text table of compare() rows."""
    header = f"{'method':<12} {'Acc':>7} {'ME':>8} {'n':>7}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(f"{r['method']:<12} {r['acc']:>7.1f} {r['me']:>8.2f} {r['n']:>7d}")
    return "\n".join(lines)


def format_csv(rows) -> str:
    lines = ["method,acc,me,n"]
    for r in rows:
        lines.append(f"{r['method']},{r['acc']:.6f},{r['me']:.6f},{r['n']}")
    return "\n".join(lines) + "\n"

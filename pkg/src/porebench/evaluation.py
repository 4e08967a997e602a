"""Scoring of prediction CSVs against ground-truth window labels.

Per-window relative errors with the zero-pulse rules, staged aggregation
(per grid cell, per duration, total), the zero-safe relative percent
difference, window-count-to-frequency conversion, and ordinary
least-squares trend fits.

Standard deviations use the population convention (divide by N) at every
stage.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FEATURES = ("count", "amplitude", "duration")


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class ErrorRecord:
    trace_id: str
    window_index: int
    count_error: float
    amplitude_error: float
    duration_error: float
    improper: bool = False   # true zero mispredicted as nonzero

    def error(self, feature: str) -> float:
        return getattr(self, f"{feature}_error")


def relative_error(x: float, x0: float) -> float:
    """|x - x0| / x0; callers must route zero-truth values elsewhere."""
    if x0 == 0:
        raise EvaluationError("relative error undefined at true value 0")
    return abs(x - x0) / x0


def rpd(x: float, x0: float) -> float:
    """Relative percent difference, zero-safe: |x-x0| / ((|x|+|x0|)/2).

    rpd(0, 0) is defined as 0 (perfect agreement).
    """
    if x == 0 and x0 == 0:
        return 0.0
    return abs(x - x0) / ((abs(x) + abs(x0)) / 2.0)


def score_window(truth: dict, pred: dict) -> ErrorRecord:
    """Score one window under the zero-pulse rules."""
    key = (truth["trace_id"], truth["window_index"])
    if truth["count"] == 0:
        if pred["count"] == 0:
            return ErrorRecord(*key, 0.0, 0.0, 0.0)
        return ErrorRecord(*key, 1.0, 1.0, 1.0, improper=True)
    return ErrorRecord(
        *key,
        relative_error(pred["count"], truth["count"]),
        relative_error(pred["avg_amplitude_pA"], truth["avg_amplitude_pA"]),
        relative_error(pred["avg_duration_ms"], truth["avg_duration_ms"]))


def score_predictions(pred_rows: list[dict],
                      label_rows: list[dict]) -> list[ErrorRecord]:
    """One ErrorRecord per labeled window; keys must match exactly."""
    pred_map = {(r["trace_id"], r["window_index"]): r for r in pred_rows}
    label_keys = {(r["trace_id"], r["window_index"]) for r in label_rows}
    missing = sorted(label_keys - pred_map.keys())
    extra = sorted(pred_map.keys() - label_keys)
    if missing or extra:
        raise EvaluationError(
            f"window key mismatch: {len(missing)} missing "
            f"(first: {missing[:3]}), {len(extra)} extra (first: {extra[:3]})")
    return [score_window(truth, pred_map[(truth['trace_id'],
                                          truth['window_index'])])
            for truth in label_rows]


def _mean_std(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=float)
    return {"mean": float(arr.mean()), "std": float(arr.std())}


def aggregate(records: list[ErrorRecord], manifest: dict) -> dict:
    """Staged aggregation of per-window errors.

    Stage 2: mean/std over windows per (duration, cnp, dnp) grid cell.
    Stage 3: mean/std of cell means per duration.
    Stage 4: mean/std of per-duration means.
    All stages are emitted so totals are recomputable from raw records.
    """
    trace_cell = {t["id"]: (t["duration_s"], t["cnp_nM"], t["dnp_m"])
                  for t in manifest["traces"]}
    by_cell: dict[tuple, dict[str, list[float]]] = {}
    improper = 0
    for rec in records:
        if rec.trace_id not in trace_cell:
            raise EvaluationError(f"record {rec.trace_id} not in manifest")
        cell = trace_cell[rec.trace_id]
        bucket = by_cell.setdefault(cell, {f: [] for f in FEATURES})
        for f in FEATURES:
            bucket[f].append(rec.error(f))
        improper += rec.improper

    per_cell = []
    for cell in sorted(by_cell):
        entry = {"duration_s": cell[0], "cnp_nM": cell[1], "dnp_m": cell[2]}
        for f in FEATURES:
            entry[f] = _mean_std(by_cell[cell][f])
        per_cell.append(entry)

    durations = sorted({c["duration_s"] for c in per_cell})
    per_duration = []
    for dur in durations:
        cells = [c for c in per_cell if c["duration_s"] == dur]
        entry = {"duration_s": dur}
        for f in FEATURES:
            entry[f] = _mean_std([c[f]["mean"] for c in cells])
        per_duration.append(entry)

    totals = {f: _mean_std([d[f]["mean"] for d in per_duration])
              for f in FEATURES}
    return {"totals": totals, "per_duration": per_duration,
            "per_cell": per_cell, "improper_count": improper,
            "std_convention": "population"}


def window_frequency(count: int, window_seconds: float = 0.5) -> float:
    """Event rate implied by a window count, Hz."""
    if count < 0:
        raise EvaluationError("count must be >= 0")
    return count / window_seconds


def linear_fit(xs, ys) -> tuple[float, float, float]:
    """Ordinary least squares: (slope, intercept, r_squared).

    r_squared is 0 by convention when ys is constant.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2 or np.all(xs == xs[0]):
        raise EvaluationError("need at least 2 distinct x values")
    slope, intercept = np.polyfit(xs, ys, 1)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    if ss_tot == 0.0:
        return float(slope), float(intercept), 0.0
    residuals = ys - (slope * xs + intercept)
    r2 = 1.0 - float(np.sum(residuals ** 2)) / ss_tot
    return float(slope), float(intercept), r2

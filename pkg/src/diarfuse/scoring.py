"""Diarization error rate with an optimal speaker mapping."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import UndefinedMetricError
from .mapping import hungarian
from .rttm_io import EPSILON, Hypothesis, UEMRegion
from .timeline import build_grid

TICKS_PER_SECOND = 1_000_000_000


@dataclass(frozen=True)
class DERReport:
    """Error components as fractions of the scored reference speaker time.

    The ``*_time`` fields keep the raw seconds so reports of several
    recordings can be pooled with :meth:`aggregate`.
    """

    missed_time: float
    false_alarm_time: float
    confusion_time: float
    scored_time: float

    @property
    def missed(self) -> float:
        return self.missed_time / self.scored_time

    @property
    def false_alarm(self) -> float:
        return self.false_alarm_time / self.scored_time

    @property
    def confusion(self) -> float:
        return self.confusion_time / self.scored_time

    @property
    def der(self) -> float:
        return self.missed + self.false_alarm + self.confusion

    @classmethod
    def aggregate(cls, reports: Iterable["DERReport"]) -> "DERReport":
        reports = list(reports)
        return cls(
            math.fsum(r.missed_time for r in reports),
            math.fsum(r.false_alarm_time for r in reports),
            math.fsum(r.confusion_time for r in reports),
            math.fsum(r.scored_time for r in reports),
        )


def _distance_to_nearest(points: np.ndarray, marks: np.ndarray) -> np.ndarray:
    marks = np.sort(marks)
    idx = np.searchsorted(marks, points)
    left = np.abs(points - marks[np.clip(idx - 1, 0, marks.size - 1)])
    right = np.abs(marks[np.clip(idx, 0, marks.size - 1)] - points)
    return np.minimum(left, right)


def der(
    ref: Hypothesis,
    hyp: Hypothesis,
    collar: float = 0.0,
    uem: Sequence[UEMRegion] | None = None,
    single_speaker_only: bool = False,
    epsilon: float = EPSILON,
) -> DERReport:
    """Score ``hyp`` against ``ref``.

    ``collar`` seconds on each side of every reference turn boundary are not
    scored, nor is time outside the ``uem`` regions of this recording (all
    time is scored when there are none). With ``single_speaker_only`` only
    time where the reference has at most one speaker is scored.
    """
    if collar < 0:
        raise ValueError("collar must be non-negative")
    ref_bounds = np.array([t.start for t in ref.turns] + [t.end for t in ref.turns], dtype=float)
    extra: list[float] = []
    if collar > 0:
        extra.extend((ref_bounds - collar).tolist())
        extra.extend((ref_bounds + collar).tolist())
    regions = [u for u in (uem or ()) if u.recording == ref.recording]
    for u in regions:
        extra.extend((u.start, u.end))

    grid = build_grid([ref, hyp], extra_times=extra, epsilon=epsilon)
    if grid.n_segments == 0:
        raise UndefinedMetricError(f"no reference speech to score in {ref.recording!r}")
    mid = grid.midpoints()
    # integer nanoseconds: sums are exact, so equally good speaker mappings
    # give identical reports whatever the label names
    ticks = np.round(grid.bounds * TICKS_PER_SECOND).astype(np.int64)
    weight = np.diff(ticks)
    if collar > 0 and ref_bounds.size:
        weight[_distance_to_nearest(mid, ref_bounds) < collar] = 0
    if regions:
        inside = np.zeros(mid.size, dtype=bool)
        for u in regions:
            inside |= (mid >= u.start) & (mid < u.end)
        weight[~inside] = 0
    ref_act, hyp_act = grid.active
    n_ref = ref_act.sum(axis=1)
    n_hyp = hyp_act.sum(axis=1)
    if single_speaker_only:
        weight[n_ref > 1] = 0

    scored = int(weight @ n_ref)
    if scored <= 0:
        raise UndefinedMetricError(f"no reference speech to score in {ref.recording!r}")
    overlap = ref_act.T.astype(np.int64) @ (weight[:, None] * hyp_act)
    correct = 0
    if overlap.size:
        correct = sum(int(overlap[i, j]) for i, j in hungarian(-overlap.astype(float)).items())
    missed = int(weight @ np.maximum(n_ref - n_hyp, 0))
    false_alarm = int(weight @ np.maximum(n_hyp - n_ref, 0))
    confusion = int(weight @ np.minimum(n_ref, n_hyp)) - correct
    return DERReport(
        missed / TICKS_PER_SECOND,
        false_alarm / TICKS_PER_SECOND,
        confusion / TICKS_PER_SECOND,
        scored / TICKS_PER_SECOND,
    )


def average_pairwise_der(hyps: Sequence[Hypothesis], epsilon: float = EPSILON) -> list[float]:
    """Mean DER of each hypothesis scored against every other one.

    A pair whose reference side has no speech counts as 0 when the scored
    side is empty too and as 1 otherwise.
    """
    k = len(hyps)
    if k < 2:
        raise ValueError("need at least two hypotheses")
    out = []
    for i in range(k):
        total = 0.0
        for j in range(k):
            if j == i:
                continue
            try:
                total += der(hyps[j], hyps[i], epsilon=epsilon).der
            except UndefinedMetricError:
                total += 0.0 if not hyps[i].turns else 1.0
        out.append(total / (k - 1))
    return out

"""Interval algebra over hypotheses.

Everything here is computed on a shared *boundary grid*: the sorted union of
all turn starts and ends of the hypotheses involved, with boundaries closer
than ``epsilon`` coalesced. Between two consecutive boundaries every
speaker's activity is constant, so durations and overlaps reduce to sums over
grid segments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .rttm_io import EPSILON, Hypothesis, Turn


@dataclass(frozen=True)
class Grid:
    """Coalesced boundaries plus per-hypothesis speaker activity.

    ``active[k]`` is a boolean array of shape ``(n_segments, len(labels[k]))``.
    """

    bounds: np.ndarray
    labels: tuple[tuple[str, ...], ...]
    active: tuple[np.ndarray, ...]

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.bounds)

    @property
    def n_segments(self) -> int:
        return max(len(self.bounds) - 1, 0)

    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.bounds[:-1] + self.bounds[1:])


def build_grid(
    hyps: Sequence[Hypothesis],
    extra_times: Iterable[float] = (),
    epsilon: float = EPSILON,
) -> Grid:
    """Partition time at every turn boundary of ``hyps`` (and ``extra_times``)."""
    starts = [np.array([t.start for t in h.turns], dtype=float) for h in hyps]
    ends = [np.array([t.end for t in h.turns], dtype=float) for h in hyps]
    extra = np.asarray(list(extra_times), dtype=float)
    times = np.concatenate(starts + ends + [extra]) if hyps or extra.size else np.zeros(0)
    labels = tuple(tuple(sorted(h.speakers)) for h in hyps)
    if times.size == 0:
        return Grid(np.zeros(0), labels, tuple(np.zeros((0, len(l)), bool) for l in labels))

    order = np.argsort(times, kind="stable")
    sorted_times = times[order]
    new_group = np.empty(sorted_times.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = np.diff(sorted_times) > epsilon
    group_sorted = np.cumsum(new_group) - 1
    group = np.empty_like(group_sorted)
    group[order] = group_sorted
    bounds = sorted_times[new_group]
    n_seg = bounds.size - 1

    active = []
    offset = 0
    n_starts = sum(s.size for s in starts)
    for h, lab, s in zip(hyps, labels, starts):
        n = s.size
        si = group[offset : offset + n]
        ei = group[n_starts + offset : n_starts + offset + n]
        offset += n
        index = {name: i for i, name in enumerate(lab)}
        li = np.array([index[t.speaker] for t in h.turns], dtype=int)
        delta = np.zeros((n_seg + 1, len(lab)), dtype=np.int64)
        np.add.at(delta, (si, li), 1)
        np.add.at(delta, (ei, li), -1)
        active.append(np.cumsum(delta, axis=0)[:-1] > 0)
    return Grid(bounds, labels, tuple(active))


def speaker_durations(h: Hypothesis) -> dict[str, float]:
    """Total speaking time per speaker label."""
    out: dict[str, float] = {}
    for t in h.turns:
        out[t.speaker] = out.get(t.speaker, 0.0) + t.duration
    return out


@dataclass(frozen=True)
class OverlapMatrix:
    """Temporal overlap between the labels of two hypotheses.

    ``absolute[i, j]`` is seconds of common speech of ``rows[i]`` (in the
    first hypothesis) and ``cols[j]`` (in the second); ``relative`` divides
    it by the sum of the two labels' speaking times, so it lies in [0, 0.5].
    """

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    absolute: np.ndarray
    relative: np.ndarray
    row_durations: np.ndarray
    col_durations: np.ndarray

    def get(self, row: str, col: str, relative: bool = False) -> float:
        m = self.relative if relative else self.absolute
        return float(m[self.rows.index(row), self.cols.index(col)])

    def transpose(self) -> "OverlapMatrix":
        return OverlapMatrix(
            self.cols, self.rows, self.absolute.T, self.relative.T,
            self.col_durations, self.row_durations,
        )


def pairwise_overlap(a: Hypothesis, b: Hypothesis, epsilon: float = EPSILON) -> OverlapMatrix:
    grid = build_grid([a, b], epsilon=epsilon)
    lengths = grid.lengths
    act_a = grid.active[0].astype(float)
    act_b = grid.active[1].astype(float)
    absolute = act_a.T @ (lengths[:, None] * act_b)
    # Durations measured on the same grid keep relative(i, i) of a == b at exactly 0.5.
    dur_a = act_a.T @ lengths
    dur_b = act_b.T @ lengths
    denom = dur_a[:, None] + dur_b[None, :]
    relative = np.divide(absolute, denom, out=np.zeros_like(absolute), where=denom > 0)
    return OverlapMatrix(grid.labels[0], grid.labels[1], absolute, relative, dur_a, dur_b)


@dataclass(frozen=True)
class Region:
    """Maximal interval over which no input hypothesis changes speakers.

    ``speaker_sets[k]`` holds the labels hypothesis ``k`` has active in
    ``[start, end)``.
    """

    start: float
    end: float
    speaker_sets: tuple[frozenset[str], ...]

    @property
    def duration(self) -> float:
        return self.end - self.start

    def with_span(self, start: float, end: float) -> "Region":
        return Region(start, end, self.speaker_sets)


def build_regions(mapped: Sequence[Hypothesis], epsilon: float = EPSILON) -> list[Region]:
    """Split the union of all speech into voting regions.

    Hypotheses must share a label space (see :func:`diarfuse.mapping.apply_mapping`).
    Stretches where every hypothesis is silent produce no region.
    """
    grid = build_grid(mapped, epsilon=epsilon)
    regions = []
    bounds = grid.bounds
    label_arrays = [np.array(lab, dtype=object) for lab in grid.labels]
    for s in range(grid.n_segments):
        sets = tuple(
            frozenset(labs[act[s]]) for labs, act in zip(label_arrays, grid.active)
        )
        if any(sets):
            regions.append(Region(float(bounds[s]), float(bounds[s + 1]), sets))
    return regions


def regions_to_turns(
    assigned: Iterable[tuple[Region, Iterable[str]]],
    recording: str = "",
    source_id: str = "",
    epsilon: float = EPSILON,
) -> Hypothesis:
    """Rebuild turns from per-region label assignments.

    Consecutive regions carrying the same label (gap <= epsilon) are joined
    into one turn.
    """
    turns = [
        Turn(region.start, region.end - region.start, label, recording)
        for region, labels in assigned
        for label in labels
        if region.end - region.start > 0
    ]
    return Hypothesis.from_turns(recording, turns, source_id=source_id, epsilon=epsilon)


def union_duration(hyps: Sequence[Hypothesis], epsilon: float = EPSILON) -> float:
    """Length of the time covered by at least one turn of any hypothesis."""
    grid = build_grid(hyps, epsilon=epsilon)
    if grid.n_segments == 0:
        return 0.0
    speech = np.zeros(grid.n_segments, dtype=bool)
    for act in grid.active:
        speech |= act.any(axis=1)
    return float(grid.lengths[speech].sum())


@dataclass(frozen=True)
class OverlapStats:
    """Speech statistics of one hypothesis.

    ``overlap_fraction`` is the speaker time in excess of one speaker
    (sum of ``n - 1`` over time with ``n >= 1`` active speakers) divided by
    the total speaker time. It is exactly the smallest missed-speech rate any
    single-speaker output can reach on this hypothesis, and equals
    overlapped time / total speaker time when at most two speakers overlap.
    """

    speakers: int
    speech: float
    overlap: float
    speaker_time: float
    overlap_fraction: float


def overlap_stats(h: Hypothesis, epsilon: float = EPSILON) -> OverlapStats:
    grid = build_grid([h], epsilon=epsilon)
    if grid.n_segments == 0:
        return OverlapStats(len(h.speakers), 0.0, 0.0, 0.0, 0.0)
    lengths = grid.lengths
    n = grid.active[0].sum(axis=1)
    speaker_time = float(lengths @ n)
    excess = float(lengths @ np.maximum(n - 1, 0))
    return OverlapStats(
        speakers=len(h.speakers),
        speech=float(lengths[n > 0].sum()),
        overlap=float(lengths[n > 1].sum()),
        speaker_time=speaker_time,
        overlap_fraction=excess / speaker_time if speaker_time > 0 else 0.0,
    )


def overlap_fraction(h: Hypothesis, epsilon: float = EPSILON) -> float:
    return overlap_stats(h, epsilon).overlap_fraction

"""Region-wise weighted majority voting.

:func:`dover_vote` keeps the single best-supported speaker per region.
:func:`doverlap_vote` first estimates how many speakers a region holds from
the weighted mean of the per-hypothesis speaker counts, then keeps that many
of the best-supported speakers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .mapping import RankWeights
from .timeline import Region

#: Tallies closer than this are treated as equal.
TIE_TOLERANCE = 1e-9


def round_half_up(x: float) -> int:
    # the slack keeps e.g. 1.4999999999999998 (a float-noisy 1.5) rounding up
    return int(math.floor(x + 0.5 + TIE_TOLERANCE))


@dataclass(frozen=True)
class RegionVote:
    region: Region
    tally: dict[str, float]
    speaker_counts: tuple[int, ...]


def tally_region(region: Region, weights: RankWeights) -> RegionVote:
    """Sum the weights of the hypotheses supporting each label."""
    support: dict[str, list[float]] = {}
    for k, labels in enumerate(region.speaker_sets):
        for label in labels:
            support.setdefault(label, []).append(weights.weights[k])
    # fsum is order independent, so permuting hypotheses cannot move a tally
    tally = {label: math.fsum(ws) for label, ws in support.items()}
    return RegionVote(region, tally, tuple(len(s) for s in region.speaker_sets))


def estimate_speaker_count(vote: RegionVote, weights: RankWeights) -> int:
    """Weighted mean of the per-hypothesis speaker counts, rounded half up.

    Capped at the number of labels with positive support.
    """
    mean = math.fsum(w * n for w, n in zip(weights.weights, vote.speaker_counts))
    n_hat = round_half_up(mean)
    return min(n_hat, sum(1 for v in vote.tally.values() if v > 0))


def dover_vote(
    regions: Sequence[Region], weights: RankWeights
) -> list[tuple[Region, frozenset[str]]]:
    """At most one label per region: the one with the largest tally.

    Ties go to the label backed by the best-ranked hypothesis, then to the
    lexicographically smaller label.
    """
    rank = weights.rank
    out = []
    for region in regions:
        vote = tally_region(region, weights)
        if not vote.tally:
            out.append((region, frozenset()))
            continue
        best_rank = {
            label: min(rank[k] for k, s in enumerate(region.speaker_sets) if label in s)
            for label in vote.tally
        }
        top = max(vote.tally.values())
        tied = [l for l, v in vote.tally.items() if v >= top - TIE_TOLERANCE]
        winner = min(tied, key=lambda l: (best_rank[l], l))
        out.append((region, frozenset([winner])))
    return out


def select_speakers(vote: RegionVote, n_hat: int) -> list[tuple[float, float, frozenset[str]]]:
    """Pick the ``n_hat`` best-supported labels for one region.

    Returns ``(start, end, labels)`` pieces covering the region. When the last
    slots are tied among more labels than remain, the region is cut into as
    many equal pieces as there are tied labels and the tied labels take turns
    filling the free slots.
    """
    region = vote.region
    if n_hat <= 0 or not vote.tally:
        return [(region.start, region.end, frozenset())]
    ranked = sorted(vote.tally.items(), key=lambda kv: (-kv[1], kv[0]))
    cutoff = ranked[min(n_hat, len(ranked)) - 1][1]
    sure = [l for l, v in ranked if v > cutoff + TIE_TOLERANCE]
    tied = [l for l, v in ranked if abs(v - cutoff) <= TIE_TOLERANCE]
    slots = n_hat - len(sure)
    if len(tied) <= slots:
        return [(region.start, region.end, frozenset(sure + tied))]
    m = len(tied)
    step = (region.end - region.start) / m
    pieces = []
    for i in range(m):
        start = region.start + i * step
        end = region.end if i == m - 1 else region.start + (i + 1) * step
        chosen = [tied[(i + j) % m] for j in range(slots)]
        pieces.append((start, end, frozenset(sure + chosen)))
    return pieces


def doverlap_vote(
    regions: Sequence[Region], weights: RankWeights
) -> list[tuple[Region, frozenset[str]]]:
    """Overlap-aware voting; tie-split regions come back as several pieces."""
    out = []
    for region in regions:
        vote = tally_region(region, weights)
        n_hat = estimate_speaker_count(vote, weights)
        for start, end, labels in select_speakers(vote, n_hat):
            piece = region if (start, end) == (region.start, region.end) else region.with_span(start, end)
            out.append((piece, labels))
    return out

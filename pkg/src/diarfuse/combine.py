"""End-to-end combination of K hypotheses of one recording.

* ``dover``: incremental Hungarian mapping, single-speaker voting;
* ``dover_global``: cost-tensor mapping, single-speaker voting;
* ``doverlap``: cost-tensor mapping, overlap-aware voting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import InconsistentRecordingsError
from .mapping import (
    DEFAULT_TUPLE_BUDGET,
    LabelMapping,
    RankWeights,
    apply_mapping,
    dover_incremental_map,
    global_map,
    rank_hypotheses,
)
from .rttm_io import EPSILON, Hypothesis
from .timeline import Region, build_regions, regions_to_turns
from .voting import dover_vote, doverlap_vote

logger = logging.getLogger(__name__)

METHODS = ("doverlap", "dover", "dover_global")
DEFAULT_CRITERION = {
    "dover": "avg_der",
    "dover_global": "total_relative_overlap",
    "doverlap": "total_relative_overlap",
}


@dataclass(frozen=True)
class CombineOptions:
    """``weighting`` is ``"rank"``, ``"uniform"`` or a list of raw weights,
    one per input. ``rank_criterion=None`` picks the method's default."""

    method: str = "doverlap"
    weighting: str | Sequence[float] = "rank"
    rank_criterion: str | None = None
    epsilon: float = EPSILON
    tuple_budget: int = DEFAULT_TUPLE_BUDGET
    source_id: str = "combined"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if isinstance(self.weighting, str):
            if self.weighting not in ("rank", "uniform"):
                raise ValueError(f"unknown weighting {self.weighting!r}")
        elif any(not (w > 0) for w in self.weighting):
            raise ValueError("custom weights must be positive")


@dataclass(frozen=True)
class Combination:
    hypothesis: Hypothesis
    weights: RankWeights
    mapping: LabelMapping
    mapped: list[Hypothesis] = field(repr=False)
    regions: list[Region] = field(repr=False)


def resolve_weights(hyps: Sequence[Hypothesis], opts: CombineOptions) -> RankWeights:
    k = len(hyps)
    if not isinstance(opts.weighting, str):
        if len(opts.weighting) != k:
            raise ValueError(f"got {len(opts.weighting)} weights for {k} hypotheses")
        return RankWeights.custom(list(opts.weighting))
    if opts.weighting == "uniform":
        return RankWeights.uniform(k)
    criterion = opts.rank_criterion or DEFAULT_CRITERION[opts.method]
    return rank_hypotheses(hyps, criterion, epsilon=opts.epsilon)


def combine(
    hyps: Sequence[Hypothesis],
    opts: CombineOptions | None = None,
    weights: RankWeights | None = None,
) -> Combination:
    """Combine hypotheses of the same recording into one.

    ``weights`` overrides the weighting named in ``opts``.
    """
    opts = opts or CombineOptions()
    if not hyps:
        raise ValueError("need at least one hypothesis")
    recordings = {h.recording for h in hyps}
    if len(recordings) > 1:
        raise InconsistentRecordingsError(f"hypotheses span several recordings: {sorted(recordings)}")
    recording = hyps[0].recording
    eps = opts.epsilon
    weights = weights or resolve_weights(hyps, opts)

    # Mapping sees hypotheses best-ranked first, so ties favour trusted systems.
    order = list(weights.order)
    ranked = [hyps[k] for k in order]
    if opts.method == "dover":
        ranked_mapping = dover_incremental_map(ranked, epsilon=eps)
    else:
        ranked_mapping = global_map(ranked, tuple_budget=opts.tuple_budget, epsilon=eps)
    mapping = LabelMapping(
        {(order[pos], label): g for (pos, label), g in ranked_mapping.entries.items()},
        ranked_mapping.global_labels,
    )

    mapped = apply_mapping(hyps, mapping)
    regions = build_regions(mapped, epsilon=eps)
    vote = doverlap_vote if opts.method == "doverlap" else dover_vote
    assigned = vote(regions, weights)
    out = regions_to_turns(assigned, recording=recording, source_id=opts.source_id, epsilon=eps)
    return Combination(out, weights, mapping, mapped, regions)


def combine_recordings(
    inputs: Sequence[Mapping[str, Hypothesis]],
    opts: CombineOptions | None = None,
    strict: bool = False,
) -> dict[str, Combination]:
    """Combine per recording across several parsed files.

    A recording missing from some inputs is combined over the inputs that
    have it (custom weights are renormalized over those); ``strict`` turns
    that situation into :class:`InconsistentRecordingsError`.
    """
    opts = opts or CombineOptions()
    all_recs = sorted(set().union(*[set(m) for m in inputs])) if inputs else []
    out = {}
    for rec in all_recs:
        present = [i for i, m in enumerate(inputs) if rec in m]
        if len(present) < len(inputs):
            msg = f"recording {rec!r} appears in {len(present)} of {len(inputs)} inputs"
            if strict:
                raise InconsistentRecordingsError(msg)
            logger.warning("%s; combining the available ones", msg)
        hyps = [inputs[i][rec] for i in present]
        weights = None
        if not isinstance(opts.weighting, str):
            weights = RankWeights.custom([opts.weighting[i] for i in present])
        out[rec] = combine(hyps, opts, weights=weights)
    return out

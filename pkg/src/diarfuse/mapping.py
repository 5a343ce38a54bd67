"""Bringing K hypotheses into one global speaker-label space.

Three strategies are provided:

* :func:`hungarian` -- optimal 2-D assignment, used by scoring and the
  incremental method;
* :func:`dover_incremental_map` -- hypotheses are matched one by one against
  the union of those already mapped;
* :func:`global_map` -- a dense cost tensor over all label tuples
  (:func:`build_cost_tensor`) followed by greedy k-partite matching
  (:func:`greedy_kpartite_map`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import CapacityError, MappingError
from .rttm_io import EPSILON, Hypothesis
from .timeline import pairwise_overlap

DEFAULT_TUPLE_BUDGET = 10_000_000
RANK_EXPONENT = 0.1

RANK_CRITERIA = ("avg_der", "total_relative_overlap", "literal_overlap_ascending")


# --------------------------------------------------------------------------
# Hungarian assignment
# --------------------------------------------------------------------------

def _lsa_value(cost: np.ndarray) -> float:
    if cost.size == 0:
        return 0.0
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].sum())


def hungarian(cost) -> dict[int, int]:
    """Minimum-cost assignment of rows to columns.

    Rectangular matrices are allowed; ``min(rows, cols)`` pairs are returned
    as a ``{row: col}`` dict. Among equally cheap assignments the one whose
    sorted ``(row, col)`` pair list is lexicographically smallest wins, so
    results do not depend on solver internals.
    """
    c = np.asarray(cost, dtype=float)
    if c.ndim != 2:
        raise ValueError(f"cost must be a 2-D matrix, got shape {c.shape}")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost matrix contains non-finite entries")
    n_rows, n_cols = c.shape
    if c.size == 0:
        return {}
    target = _lsa_value(c)
    tol = 1e-9 * max(1.0, float(np.abs(c).max()) * min(n_rows, n_cols))
    need = min(n_rows, n_cols)

    result: dict[int, int] = {}
    fixed = 0.0
    rows_left = list(range(n_rows))
    cols_left = list(range(n_cols))
    for i in range(n_rows):
        if len(result) == need:
            break
        rows_left.remove(i)
        for j in cols_left:
            rest = [cc for cc in cols_left if cc != j]
            value = fixed + c[i, j] + _lsa_value(c[np.ix_(rows_left, rest)])
            if value <= target + tol:
                result[i] = j
                fixed += c[i, j]
                cols_left = rest
                break
        # no column fits: an optimal assignment leaves row i unmatched
    return result


# --------------------------------------------------------------------------
# Label mappings and weights
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LabelMapping:
    """Total map from ``(hypothesis index, local label)`` to a global label."""

    entries: Mapping[tuple[int, str], str]
    global_labels: tuple[str, ...]

    def __getitem__(self, key: tuple[int, str]) -> str:
        return self.entries[key]

    def for_hypothesis(self, k: int) -> dict[str, str]:
        return {label: g for (idx, label), g in self.entries.items() if idx == k}

    def to_text(self) -> str:
        """``hyp_index local_label global_label`` lines, sorted."""
        return "".join(
            f"{k} {label} {g}\n" for (k, label), g in sorted(self.entries.items())
        )

    @classmethod
    def identity(cls, hyps: Sequence[Hypothesis]) -> "LabelMapping":
        entries = {(k, s): s for k, h in enumerate(hyps) for s in h.speakers}
        return cls(entries, tuple(sorted(set(entries.values()))))


@dataclass(frozen=True)
class RankWeights:
    """Per-hypothesis voting weights.

    ``order`` lists hypothesis indices from most trusted (rank 1) down;
    ``weights[k]`` is the normalized weight of hypothesis ``k``.
    """

    order: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if sorted(self.order) != list(range(len(self.weights))):
            raise ValueError("order must be a permutation of the hypothesis indices")
        if any(not (w > 0) for w in self.weights):
            raise ValueError("weights must be positive")

    @property
    def rank(self) -> tuple[int, ...]:
        """1-based rank of each hypothesis."""
        out = [0] * len(self.order)
        for r, k in enumerate(self.order, start=1):
            out[k] = r
        return tuple(out)

    @classmethod
    def from_order(cls, order: Sequence[int]) -> "RankWeights":
        """Weights decaying as ``1 / rank**0.1``, normalized to sum to one."""
        raw = [0.0] * len(order)
        for r, k in enumerate(order, start=1):
            raw[k] = 1.0 / r**RANK_EXPONENT
        total = math.fsum(raw)
        return cls(tuple(order), tuple(w / total for w in raw))

    @classmethod
    def uniform(cls, k: int) -> "RankWeights":
        return cls(tuple(range(k)), tuple([1.0 / k] * k))

    @classmethod
    def custom(cls, raw: Sequence[float]) -> "RankWeights":
        """User weights; rank order is by descending weight, then input order."""
        if any(not (w > 0) or not math.isfinite(w) for w in raw):
            raise ValueError("custom weights must be positive and finite")
        total = math.fsum(raw)
        order = sorted(range(len(raw)), key=lambda k: -raw[k])
        return cls(tuple(order), tuple(w / total for w in raw))

    def subset(self, indices: Sequence[int]) -> "RankWeights":
        """Weights of a subset of hypotheses, renormalized, ranks kept relative."""
        pos = {k: i for i, k in enumerate(indices)}
        order = [pos[k] for k in self.order if k in pos]
        raw = [self.weights[k] for k in indices]
        total = math.fsum(raw)
        return RankWeights(tuple(order), tuple(w / total for w in raw))


def _unique_name(base: str, used: set[str]) -> str:
    if base not in used:
        return base
    for n in itertools.count(2):
        cand = f"{base}_{n}"
        if cand not in used:
            return cand
    raise AssertionError("unreachable")


def apply_mapping(hyps: Sequence[Hypothesis], mapping: LabelMapping) -> list[Hypothesis]:
    """Relabel every hypothesis into the global label space."""
    out = []
    for k, h in enumerate(hyps):
        local = {}
        for s in h.speakers:
            try:
                local[s] = mapping[(k, s)]
            except KeyError:
                raise MappingError(f"label {s!r} of hypothesis {k} is not mapped") from None
        out.append(h.relabel(local))
    return out


# --------------------------------------------------------------------------
# Ranking
# --------------------------------------------------------------------------

def rank_hypotheses(
    hyps: Sequence[Hypothesis],
    criterion: str = "total_relative_overlap",
    epsilon: float = EPSILON,
) -> RankWeights:
    """Order hypotheses by agreement with the others and derive rank weights.

    ``avg_der``: ascending mean DER against all other hypotheses.
    ``total_relative_overlap``: descending summed relative overlap with all
    other hypotheses (most agreeing first).
    ``literal_overlap_ascending``: the same sum, ascending.
    Ties keep input order.
    """
    k = len(hyps)
    if criterion not in RANK_CRITERIA:
        raise ValueError(f"unknown rank criterion {criterion!r}")
    if k <= 1:
        return RankWeights.from_order(list(range(k))) if k else RankWeights((), ())
    if criterion == "avg_der":
        from .scoring import average_pairwise_der

        score = average_pairwise_der(hyps, epsilon=epsilon)
        key = lambda i: score[i]
    else:
        totals = total_relative_overlaps(hyps, epsilon)
        sign = -1.0 if criterion == "total_relative_overlap" else 1.0
        key = lambda i: sign * totals[i]
    order = sorted(range(k), key=key)
    return RankWeights.from_order(order)


def total_relative_overlaps(hyps: Sequence[Hypothesis], epsilon: float = EPSILON) -> list[float]:
    """Summed relative overlap of each hypothesis with every other one."""
    k = len(hyps)
    totals = [0.0] * k
    for p, q in itertools.combinations(range(k), 2):
        s = float(pairwise_overlap(hyps[p], hyps[q], epsilon).relative.sum())
        totals[p] += s
        totals[q] += s
    return totals


# --------------------------------------------------------------------------
# Incremental pairwise mapping
# --------------------------------------------------------------------------

def dover_incremental_map(hyps: Sequence[Hypothesis], epsilon: float = EPSILON) -> LabelMapping:
    """Map hypotheses one at a time onto the union of those already mapped.

    The first hypothesis defines the global labels. Each later one is
    matched with the Hungarian method on absolute overlap seconds against the
    accumulated union; its leftover labels get fresh global labels.
    """
    if not hyps:
        raise ValueError("need at least one hypothesis")
    entries: dict[tuple[int, str], str] = {}
    used: set[str] = set()
    for s in sorted(hyps[0].speakers):
        entries[(0, s)] = s
        used.add(s)
    accumulated = hyps[0]
    for k in range(1, len(hyps)):
        h = hyps[k]
        ov = pairwise_overlap(h, accumulated, epsilon)
        assignment = hungarian(-ov.absolute) if ov.absolute.size else {}
        local = {}
        for i, label in enumerate(ov.rows):
            if i in assignment:
                local[label] = ov.cols[assignment[i]]
            else:
                local[label] = _unique_name(label, used)
                used.add(local[label])
            entries[(k, label)] = local[label]
        mapped = h.relabel(local)
        accumulated = Hypothesis.from_turns(
            accumulated.recording, accumulated.turns + mapped.turns, epsilon=epsilon
        )
    return LabelMapping(entries, tuple(sorted(used)))


# --------------------------------------------------------------------------
# Global mapping: cost tensor + greedy k-partite matching
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CostTensor:
    """Dense cost of mapping one label per hypothesis to a common label.

    ``values[i_1, ..., i_K]`` is minus the sum over all hypothesis pairs of the
    relative overlap between the chosen labels. ``durations[k][i]`` is the
    speaking time of ``axis_labels[k][i]``.
    """

    values: np.ndarray
    axis_labels: tuple[tuple[str, ...], ...]
    durations: tuple[np.ndarray, ...] = field(default=())

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape


def build_cost_tensor(
    hyps: Sequence[Hypothesis],
    tuple_budget: int = DEFAULT_TUPLE_BUDGET,
    epsilon: float = EPSILON,
) -> CostTensor:
    k = len(hyps)
    if k < 2:
        raise ValueError("a cost tensor needs at least two hypotheses")
    axis_labels = tuple(tuple(sorted(h.speakers)) for h in hyps)
    shape = tuple(len(l) for l in axis_labels)
    n_tuples = math.prod(shape)
    if n_tuples > tuple_budget:
        dims = " x ".join(str(n) for n in shape)
        raise CapacityError(
            f"cost tensor {dims} has {n_tuples} tuples, over the budget of {tuple_budget}"
        )
    pairwise = {}
    durations: list[np.ndarray | None] = [None] * k
    for p, q in itertools.combinations(range(k), 2):
        ov = pairwise_overlap(hyps[p], hyps[q], epsilon)
        pairwise[(p, q)] = ov.relative
        durations[p], durations[q] = ov.row_durations, ov.col_durations
    return CostTensor(tensor_from_pairwise(pairwise, shape), axis_labels, tuple(durations))


def tensor_from_pairwise(pairwise: Mapping[tuple[int, int], np.ndarray], shape) -> np.ndarray:
    """Dense ``C[i_1..i_K] = -sum_{p<q} M_pq[i_p, i_q]`` by broadcasting."""
    k = len(shape)
    values = np.zeros(shape, dtype=float)
    for (p, q), m in sorted(pairwise.items()):
        view = [1] * k
        view[p], view[q] = shape[p], shape[q]
        values -= np.asarray(m, dtype=float).reshape(view)
    return values


def _iter_tuples(flat_indices: np.ndarray, shape, chunk: int = 4096):
    for lo in range(0, flat_indices.size, chunk):
        block = np.stack(np.unravel_index(flat_indices[lo : lo + chunk], shape), axis=1)
        yield from map(tuple, block.tolist())


def greedy_kpartite_passes(tensor: CostTensor) -> list[list[tuple[int, ...]]]:
    """Greedy k-partite matching; returns the tuples accepted in each pass.

    Each pass sorts every tuple that still contains an uncovered label by
    ascending cost (ties in lexicographic index order) and greedily accepts
    tuples sharing no label with those already accepted in the same pass.
    The loop ends once every label is covered.
    """
    values = tensor.values
    shape = values.shape
    if not shape or any(n == 0 for n in shape):
        raise ValueError(f"cost tensor has an empty axis: shape {shape}")
    k = len(shape)
    flat = values.ravel()
    uncovered = [np.ones(n, dtype=bool) for n in shape]
    passes = []
    while any(u.any() for u in uncovered):
        has_uncovered = np.zeros(shape, dtype=bool)
        for axis in range(k):
            view = [1] * k
            view[axis] = shape[axis]
            has_uncovered |= uncovered[axis].reshape(view)
        candidates = np.flatnonzero(has_uncovered)
        # stable sort on the C-ordered flat index == lexicographic tie-break
        candidates = candidates[np.argsort(flat[candidates], kind="stable")]
        used = [np.zeros(n, dtype=bool) for n in shape]
        accepted = []
        for tup in _iter_tuples(candidates, shape):
            if any(used[axis][i] for axis, i in enumerate(tup)):
                continue
            accepted.append(tup)
            for axis, i in enumerate(tup):
                used[axis][i] = True
            if any(u.all() for u in used):
                break  # the matching is maximal
        for tup in accepted:
            for axis, i in enumerate(tup):
                uncovered[axis][i] = False
        passes.append(accepted)
    return passes


def greedy_kpartite_map(tensor: CostTensor) -> LabelMapping:
    """Turn the greedy matching into a total label mapping.

    A label is bound by the first accepted tuple that contains it. In a later
    tuple, its still-unbound labels join the global label of the tuple's
    already-bound member with the longest speaking time (earliest hypothesis
    on ties). Global labels are named after the member of the
    lowest-indexed hypothesis.
    """
    labels = tensor.axis_labels
    durations = tensor.durations or tuple(np.zeros(len(l)) for l in labels)
    bound: dict[tuple[int, int], str] = {}
    used: set[str] = set()
    for accepted in greedy_kpartite_passes(tensor):
        for tup in accepted:
            members = list(enumerate(tup))
            prior = [(axis, i) for axis, i in members if (axis, i) in bound]
            if prior:
                best = max(prior, key=lambda m: (durations[m[0]][m[1]], -m[0]))
                g = bound[best]
            else:
                g = _unique_name(labels[0][tup[0]], used)
                used.add(g)
            for axis, i in members:
                bound.setdefault((axis, i), g)
    entries = {(axis, labels[axis][i]): g for (axis, i), g in bound.items()}
    return LabelMapping(entries, tuple(sorted(used)))


def global_map(
    hyps: Sequence[Hypothesis],
    tuple_budget: int = DEFAULT_TUPLE_BUDGET,
    epsilon: float = EPSILON,
) -> LabelMapping:
    """Cost-tensor mapping over all hypotheses that have any speech.

    Empty hypotheses carry no labels and are left out of the tensor; with a
    single non-empty hypothesis the mapping is the identity.
    """
    nonempty = [k for k, h in enumerate(hyps) if h.speakers]
    if len(nonempty) <= 1:
        return LabelMapping.identity(hyps)
    tensor = build_cost_tensor([hyps[k] for k in nonempty], tuple_budget, epsilon)
    sub = greedy_kpartite_map(tensor)
    entries = {(nonempty[axis], label): g for (axis, label), g in sub.entries.items()}
    return LabelMapping(entries, sub.global_labels)


def mapping_from_pairs(pairs: Iterable[tuple[int, str, str]]) -> LabelMapping:
    entries = {(k, local): g for k, local, g in pairs}
    return LabelMapping(entries, tuple(sorted(set(entries.values()))))

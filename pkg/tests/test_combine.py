import logging

import numpy as np
import pytest

from diarfuse.combine import CombineOptions, combine, combine_recordings, resolve_weights
from diarfuse.errors import CapacityError, InconsistentRecordingsError
from diarfuse.mapping import RankWeights
from diarfuse.rttm_io import Hypothesis, write_rttm
from diarfuse.scoring import der
from diarfuse.synth import PerturbConfig, SynthConfig, make_ensemble
from helpers import make_hyp, random_hyp

METHODS = ["doverlap", "dover", "dover_global"]


def spans(h):
    return sorted((t.speaker, round(t.start, 9), round(t.end, 9)) for t in h.turns)


def labels_at(h, t):
    return {x.speaker for x in h.turns if x.start <= t < x.end}


def test_single_input_doverlap_is_identity():
    h = make_hyp([("A", 0, 3), ("B", 2, 6), ("C", 7, 9)])
    assert spans(combine([h]).hypothesis) == spans(h)


@pytest.mark.parametrize("method", ["dover", "dover_global"])
def test_single_input_dover_identity_without_overlap(method):
    h = make_hyp([("A", 0, 3), ("B", 3, 6), ("C", 7, 9)])
    assert spans(combine([h], CombineOptions(method=method)).hypothesis) == spans(h)


def test_trio_example_doverlap(trio_hyps):
    out = combine(trio_hyps, CombineOptions(weighting="uniform")).hypothesis
    assert labels_at(out, 2.5) == {"A", "B"}
    assert der(make_hyp([("A", 2, 3), ("B", 2, 3)]), make_hyp(
        [(t.speaker, max(t.start, 2), min(t.end, 3)) for t in out.turns if t.start < 3 and t.end > 2]
    )).der == 0.0


@pytest.mark.parametrize("method", ["dover", "dover_global"])
def test_trio_example_single_speaker(trio_hyps, method):
    c = combine(trio_hyps, CombineOptions(method=method, weighting="uniform"))
    for region in c.regions:
        mid = (region.start + region.end) / 2
        assert len(labels_at(c.hypothesis, mid)) <= 1
    assert labels_at(c.hypothesis, 2.5) == {"A"}


@pytest.mark.parametrize("method", METHODS)
def test_relabeled_copies_recover_input(method):
    h = make_hyp([("A", 0, 3), ("B", 3, 6), ("C", 6.5, 9)])
    copies = [h, h.relabel(dict(zip("ABC", "xyz"))), h.relabel(dict(zip("ABC", "qpr")))]
    out = combine(copies, CombineOptions(method=method)).hypothesis
    assert der(h, out).der == 0.0


def test_options_validation():
    with pytest.raises(ValueError):
        CombineOptions(method="rover")
    with pytest.raises(ValueError):
        CombineOptions(weighting="median")
    with pytest.raises(ValueError):
        CombineOptions(weighting=[1.0, -1.0])
    with pytest.raises(ValueError):
        resolve_weights([make_hyp([("A", 0, 1)])] * 2, CombineOptions(weighting=[1.0]))
    with pytest.raises(ValueError):
        combine([])


def test_resolve_weights_defaults():
    hyps = [make_hyp([("A", 0, 10)]), make_hyp([("B", 0, 9)]), make_hyp([("C", 20, 30)])]
    assert resolve_weights(hyps, CombineOptions(weighting="uniform")) == RankWeights.uniform(3)
    assert resolve_weights(hyps, CombineOptions()).rank[2] == 3
    assert resolve_weights(hyps, CombineOptions(method="dover")).rank[2] == 3
    literal = CombineOptions(rank_criterion="literal_overlap_ascending")
    assert resolve_weights(hyps, literal).rank[2] == 1
    assert resolve_weights(hyps, CombineOptions(weighting=[1, 2, 1])).order == (1, 0, 2)


def test_mixed_recordings_rejected():
    with pytest.raises(InconsistentRecordingsError):
        combine([make_hyp([("A", 0, 1)], recording="r1"), make_hyp([("A", 0, 1)], recording="r2")])


def test_capacity_error_propagates():
    hyps = [make_hyp([(f"s{i}", i, i + 1) for i in range(5)]) for _ in range(3)]
    with pytest.raises(CapacityError):
        combine(hyps, CombineOptions(tuple_budget=100))
    # the incremental method needs no tensor
    combine(hyps, CombineOptions(method="dover", tuple_budget=100))


def test_empty_hypotheses():
    empty = Hypothesis("rec1")
    h = make_hyp([("A", 0, 2)])
    for method in METHODS:
        assert combine([empty, empty], CombineOptions(method=method)).hypothesis.turns == ()
        assert spans(combine([h, empty, h], CombineOptions(method=method)).hypothesis) == spans(h)


def test_mapping_is_total_and_input_indexed(rng):
    hyps = [random_hyp(rng, n_speakers=3, n_turns=10, labels=[f"k{k}_{i}" for i in range(3)]) for k in range(3)]
    for method in METHODS:
        c = combine(hyps, CombineOptions(method=method))
        for k, h in enumerate(hyps):
            assert set(c.mapping.for_hypothesis(k)) == set(h.speakers)
        assert [m.speakers <= set(c.mapping.global_labels) for m in c.mapped] == [True] * 3


def test_combine_is_deterministic():
    ref_cfg = SynthConfig(n_speakers=4, duration=120, target_overlap=0.2, seed=3)
    pcfg = PerturbConfig(boundary_jitter_sd=0.2, miss_prob=0.05, fa_rate=0.5,
                         confusion_prob=0.1, relabel=True, seed=9)
    _, hyps, _ = make_ensemble(ref_cfg, pcfg, 3)
    for method in METHODS:
        a = write_rttm(combine(hyps, CombineOptions(method=method)).hypothesis)
        b = write_rttm(combine(list(hyps), CombineOptions(method=method)).hypothesis)
        assert a == b


def test_doverlap_beats_inputs_on_ensemble():
    ref_cfg = SynthConfig(n_speakers=4, duration=300, target_overlap=0.2, seed=21)
    pcfg = PerturbConfig(boundary_jitter_sd=0.25, miss_prob=0.05, fa_rate=0.5,
                         confusion_prob=0.1, relabel=True, seed=22)
    ref, hyps, _ = make_ensemble(ref_cfg, pcfg, 3)
    inputs = [der(ref, h).der for h in hyps]
    out = der(ref, combine(hyps).hypothesis)
    assert out.der < np.mean(inputs)
    dover = der(ref, combine(hyps, CombineOptions(method="dover")).hypothesis)
    assert dover.missed > out.missed


def test_combine_recordings_partial(caplog):
    a = {"r1": make_hyp([("A", 0, 5)], "r1"), "r2": make_hyp([("A", 0, 5)], "r2")}
    b = {"r1": make_hyp([("B", 0, 5)], "r1")}
    with caplog.at_level(logging.WARNING):
        out = combine_recordings([a, b])
    assert list(out) == ["r1", "r2"]
    assert "'r2' appears in 1 of 2 inputs" in caplog.text
    assert spans(out["r2"].hypothesis) == [("A", 0.0, 5.0)]
    with pytest.raises(InconsistentRecordingsError):
        combine_recordings([a, b], strict=True)


def test_combine_recordings_custom_weights_renormalized():
    a = {"r1": make_hyp([("A", 0, 5)], "r1")}
    b = {"r1": make_hyp([("B", 0, 5)], "r1"), "r2": make_hyp([("B", 0, 5)], "r2")}
    c = {"r1": make_hyp([("C", 6, 9)], "r1"), "r2": make_hyp([("C", 0, 5)], "r2")}
    out = combine_recordings([a, b, c], CombineOptions(weighting=[1.0, 1.0, 3.0]))
    assert out["r2"].weights.weights == pytest.approx((0.25, 0.75))
    assert out["r1"].weights.weights == pytest.approx((0.2, 0.2, 0.6))

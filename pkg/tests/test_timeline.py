import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diarfuse.rttm_io import Hypothesis
from diarfuse.timeline import (
    Region,
    build_grid,
    build_regions,
    overlap_stats,
    pairwise_overlap,
    regions_to_turns,
    speaker_durations,
    union_duration,
)
from helpers import make_hyp, random_hyp
from oracles import sampled_durations, sampled_overlap, turns_of


def test_speaker_durations_sum():
    h = make_hyp([("spkA", 0, 2), ("spkA", 5, 6)])
    assert speaker_durations(h) == {"spkA": 3.0}
    assert speaker_durations(Hypothesis("r")) == {}


def test_speaker_durations_match_sampling(rng):
    for _ in range(10):
        h = random_hyp(rng, n_speakers=4, n_turns=50, length=120.0)
        expected = sampled_durations(turns_of(h))
        got = speaker_durations(h)
        assert set(got) == set(expected)
        for label in got:
            assert got[label] == pytest.approx(expected[label], abs=0.02)


def test_pairwise_overlap_example():
    a = make_hyp([("spkA", 0, 4)])
    b = make_hyp([("spkX", 2, 6)])
    m = pairwise_overlap(a, b)
    assert m.get("spkA", "spkX") == pytest.approx(2.0)
    assert m.get("spkA", "spkX", relative=True) == pytest.approx(0.25)


def test_pairwise_overlap_disjoint():
    m = pairwise_overlap(make_hyp([("A", 0, 1)]), make_hyp([("B", 2, 3)]))
    assert m.absolute.tolist() == [[0.0]]
    assert m.relative.tolist() == [[0.0]]


def test_pairwise_overlap_matches_sampling(rng):
    for _ in range(10):
        a = random_hyp(rng, n_speakers=3, n_turns=20)
        b = random_hyp(rng, n_speakers=4, n_turns=20, labels=["w", "x", "y", "z"])
        m = pairwise_overlap(a, b)
        oracle = sampled_overlap(turns_of(a), turns_of(b))
        for (i, j), v in oracle.items():
            assert m.get(i, j) == pytest.approx(v, abs=0.02)


def test_overlap_matrix_invariants(rng):
    for _ in range(20):
        a = random_hyp(rng, n_turns=15)
        b = random_hyp(rng, n_turns=15)
        m = pairwise_overlap(a, b)
        assert (m.absolute >= 0).all()
        assert (m.relative >= 0).all() and (m.relative <= 0.5 + 1e-12).all()
        da, db = speaker_durations(a), speaker_durations(b)
        for i, ri in enumerate(m.rows):
            for j, cj in enumerate(m.cols):
                assert m.absolute[i, j] <= min(da[ri], db[cj]) + 1e-9
        back = pairwise_overlap(b, a)
        np.testing.assert_allclose(back.relative, m.relative.T, atol=1e-12)


def test_self_overlap_diagonal_is_half():
    h = make_hyp([("A", 0, 3), ("B", 2, 5)])
    m = pairwise_overlap(h, h)
    assert np.diag(m.relative).tolist() == [0.5, 0.5]


def test_build_regions_trio(trio_hyps):
    regions = build_regions(trio_hyps)
    assert [(r.start, r.end) for r in regions] == [(i, i + 1) for i in range(6)]
    r23 = regions[2]
    assert sum("A" in s for s in r23.speaker_sets) == 3
    assert sum("B" in s for s in r23.speaker_sets) == 2
    assert [len(s) for s in r23.speaker_sets] == [2, 2, 1]


def test_build_regions_single_turn():
    (r,) = build_regions([make_hyp([("A", 0, 5)])])
    assert (r.start, r.end, r.speaker_sets) == (0, 5, (frozenset({"A"}),))


def test_build_regions_identical_inputs(rng):
    h = random_hyp(rng)
    for r in build_regions([h, h]):
        assert r.speaker_sets[0] == r.speaker_sets[1]


def test_build_regions_omits_silence():
    regions = build_regions([make_hyp([("A", 0, 1), ("A", 3, 4)]), make_hyp([("B", 0.5, 1)])])
    assert [(r.start, r.end) for r in regions] == [(0, 0.5), (0.5, 1), (3, 4)]


def test_near_coincident_boundaries_coalesce():
    a = make_hyp([("A", 0, 1.0)])
    b = make_hyp([("B", 0, 1.0 + 4e-7)])
    regions = build_regions([a, b])
    assert len(regions) == 1


def test_regions_to_turns_merge():
    r1 = Region(0, 1, (frozenset("A"),))
    r2 = Region(1, 2, (frozenset("AB"),))
    h = regions_to_turns([(r1, {"A"}), (r2, {"A", "B"})])
    assert [(t.speaker, t.start, t.end) for t in h.turns] == [("A", 0, 2), ("B", 1, 2)]


def test_regions_to_turns_empty():
    assert regions_to_turns([]).turns == ()


def test_grid_empty():
    g = build_grid([Hypothesis("r")])
    assert g.n_segments == 0


def test_overlap_stats():
    h = make_hyp([("A", 0, 4), ("B", 2, 6)])
    st_ = overlap_stats(h)
    assert (st_.speech, st_.overlap, st_.speaker_time) == (6.0, 2.0, 8.0)
    assert st_.overlap_fraction == pytest.approx(2.0 / 8.0)
    assert overlap_stats(make_hyp([("A", 0, 1), ("B", 1, 2)])).overlap_fraction == 0.0


cent = st.integers(0, 3000).map(lambda x: x / 100)
turn_rows = st.lists(
    st.tuples(st.sampled_from("ABCD"), cent, st.integers(1, 1000).map(lambda x: x / 100)),
    min_size=0,
    max_size=15,
)


@settings(max_examples=150, deadline=None)
@given(st.lists(turn_rows, min_size=1, max_size=4))
def test_regions_partition_union(all_rows):
    hyps = [make_hyp([(s, a, a + d) for s, a, d in sp]) for sp in all_rows]
    regions = build_regions(hyps)
    assert sum(r.duration for r in regions) == pytest.approx(union_duration(hyps), abs=1e-9)
    for r1, r2 in zip(regions, regions[1:]):
        assert r1.end <= r2.start
    for r in regions:
        assert r.end > r.start


@settings(max_examples=150, deadline=None)
@given(turn_rows)
def test_regions_roundtrip_identity(rows):
    h = make_hyp([(s, a, a + d) for s, a, d in rows])
    rebuilt = regions_to_turns([(r, r.speaker_sets[0]) for r in build_regions([h])], recording="rec1")
    assert [(t.speaker, t.start) for t in rebuilt.turns] == [(t.speaker, t.start) for t in h.turns]
    for x, y in zip(rebuilt.turns, h.turns):
        assert x.end == pytest.approx(y.end, abs=1e-9)

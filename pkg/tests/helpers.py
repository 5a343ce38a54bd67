"""Builders shared by the test modules."""

from diarfuse.rttm_io import Hypothesis, Turn


def make_hyp(rows, recording="rec1", source_id=""):
    """Hypothesis from ``[(speaker, start, end), ...]``."""
    return Hypothesis.from_turns(
        recording, [Turn(s, e - s, spk, recording) for spk, s, e in rows], source_id=source_id
    )


def random_hyp(rng, n_speakers=3, n_turns=10, length=60.0, grid=0.01, recording="rec1", labels=None):
    """Random hypothesis with times on a ``grid``; overlaps allowed."""
    labels = labels or [f"s{i}" for i in range(n_speakers)]
    turns = []
    for _ in range(n_turns):
        spk = labels[rng.integers(len(labels))]
        start = round(rng.integers(0, int(length / grid) - 1) * grid, 6)
        dur = round(rng.integers(1, max(2, int(length / 4 / grid))) * grid, 6)
        end = min(round(start + dur, 6), length)
        if end > start:
            turns.append((spk, start, end))
    return make_hyp(turns, recording)

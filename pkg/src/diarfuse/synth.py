"""Seeded synthetic references and error-perturbed hypothesis ensembles.

All randomness comes from numpy's ``PCG64`` bit generator (PCG XSL RR
128/64) seeded through ``numpy.random.SeedSequence``, so a given seed
yields the same output on every platform. Times are rounded to milliseconds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .rttm_io import Hypothesis, Turn, quantize
from .timeline import overlap_fraction

MIN_TURN = 0.01


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def derive_seeds(seed: int, n: int) -> list[int]:
    """``n`` independent 64-bit seeds derived from ``seed``."""
    return [int(c.generate_state(1, np.uint64)[0]) for c in np.random.SeedSequence(seed).spawn(n)]


@dataclass(frozen=True)
class SynthConfig:
    n_speakers: int = 4
    duration: float = 600.0
    target_overlap: float = 0.2
    turn_len: tuple[float, float] = (1.0, 8.0)
    seed: int = 0
    gap: tuple[float, float] = (0.1, 1.5)
    tolerance: float = 0.05
    max_retries: int = 20

    def validate(self):
        if self.n_speakers < 1:
            raise ConfigError("n_speakers must be at least 1")
        if not self.duration > 0:
            raise ConfigError("duration must be positive")
        if not 0.0 <= self.target_overlap <= 0.5:
            raise ConfigError("target_overlap must lie in [0, 0.5]")
        lo, hi = self.turn_len
        if not 0 < lo <= hi:
            raise ConfigError("turn_len must satisfy 0 < min <= max")
        if not 0 < self.gap[0] <= self.gap[1]:
            raise ConfigError("gap must satisfy 0 < min <= max")
        if self.n_speakers == 1 and self.target_overlap > 0:
            raise ConfigError("overlap needs at least two speakers")


@dataclass(frozen=True)
class PerturbConfig:
    boundary_jitter_sd: float = 0.0
    miss_prob: float = 0.0
    fa_rate: float = 0.0
    confusion_prob: float = 0.0
    relabel: bool = False
    seed: int = 0
    fa_len: tuple[float, float] = (0.5, 2.0)
    label_prefix: str = "h"

    def validate(self):
        for name in ("miss_prob", "confusion_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.fa_rate < 0 or self.boundary_jitter_sd < 0:
            raise ConfigError("fa_rate and boundary_jitter_sd must be non-negative")


def _main_stream(cfg: SynthConfig, rng):
    speakers = [f"spk{i + 1}" for i in range(cfg.n_speakers)]
    turns = []
    t = rng.uniform(0.0, cfg.gap[1])
    prev = None
    while True:
        length = rng.uniform(*cfg.turn_len)
        if t + length > cfg.duration:
            length = cfg.duration - t
            if length < cfg.turn_len[0]:
                break
        choices = [s for s in speakers if s != prev] or speakers
        speaker = choices[rng.integers(len(choices))]
        turns.append((t, t + length, speaker))
        prev = speaker
        t += length + rng.uniform(*cfg.gap)
    return speakers, turns


def _sample_reference(cfg: SynthConfig, rng, recording: str) -> Hypothesis:
    speakers, main = _main_stream(cfg, rng)
    out = [(s, e, spk) for s, e, spk in main]
    rho = cfg.target_overlap
    if rho > 0 and main:
        lengths = np.array([e - s for s, e, _ in main])
        # each inserted second overlaps exactly one main-stream speaker, so
        # excess / total = E / (T0 + E)
        needed = rho / (1.0 - rho) * lengths.sum()
        share = needed / lengths.sum()
        p_insert = min(1.0, 2.0 * share)
        chosen = rng.random(len(main)) < p_insert
        frac = np.where(chosen, rng.uniform(0.5, 1.5, len(main)) * share / p_insert, 0.0)
        for _ in range(50):
            total = (np.clip(frac, 0.0, 1.0) * lengths).sum()
            if total <= 0 or abs(total - needed) < 1e-9:
                break
            frac = np.clip(frac * needed / total, 0.0, 1.0)
        frac = np.clip(frac, 0.0, 1.0)
        for (s, e, spk), f, length in zip(main, frac, lengths):
            ins = f * length
            if ins < MIN_TURN:
                continue
            pos = s + rng.uniform(0.0, length - ins)
            others = [x for x in speakers if x != spk]
            out.append((pos, pos + ins, others[rng.integers(len(others))]))
    turns = [Turn(float(s), float(e - s), spk, recording) for s, e, spk in out if e - s > 0]
    return quantize(Hypothesis.from_turns(recording, turns, source_id="reference"))


def generate_reference(cfg: SynthConfig, recording: str = "synth") -> Hypothesis:
    """Random single-recording reference with the requested overlap fraction.

    The overlap fraction is measured as in :func:`diarfuse.timeline.overlap_stats`.
    Draws are repeated (up to ``max_retries``) until it lands within
    ``tolerance`` of the target.
    """
    cfg.validate()
    realized = None
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.max_retries):
        ref = _sample_reference(cfg, _rng(child), recording)
        realized = overlap_fraction(ref)
        if abs(realized - cfg.target_overlap) <= cfg.tolerance:
            return ref
    raise ConfigError(
        f"could not reach overlap {cfg.target_overlap:.3f} within {cfg.tolerance} "
        f"after {cfg.max_retries} attempts (last {realized})"
    )


def _free_labels(ref: Hypothesis, start: float, end: float, own: str, labels) -> list[str]:
    busy = {t.speaker for t in ref.turns if t.start < end and t.end > start}
    return [l for l in labels if l != own and l not in busy]


def perturb(ref: Hypothesis, cfg: PerturbConfig) -> Hypothesis:
    """A noisy copy of ``ref``: jittered boundaries, deleted turns, spurious
    turns, swapped labels and optionally renamed labels.

    Every turn consumes the same random draws whatever the knob values, so
    with a fixed seed raising ``miss_prob`` only ever deletes more turns.
    A label swap only picks speakers that are silent during the turn, so
    confusion never turns into missed speech through merging.
    """
    cfg.validate()
    rng = _rng(cfg.seed)
    labels = sorted(ref.speakers)
    sd = cfg.boundary_jitter_sd
    turns = []
    for t in ref.turns:
        u_miss, u_conf, u_pick = rng.random(3)
        z_start, z_end = rng.standard_normal(2)
        if u_miss < cfg.miss_prob:
            continue
        speaker = t.speaker
        if u_conf < cfg.confusion_prob:
            free = _free_labels(ref, t.start, t.end, t.speaker, labels)
            if free:
                speaker = free[int(u_pick * len(free))]
        if sd > 0:
            start = max(0.0, t.start + sd * float(z_start))
            dur = max(t.end + sd * float(z_end) - start, MIN_TURN)
        else:
            start, dur = t.start, t.duration
        turns.append(Turn(start, dur, speaker, ref.recording, t.channel))

    extent = ref.extent()[1]
    if cfg.fa_rate > 0 and extent > 0:
        for _ in range(rng.poisson(cfg.fa_rate * extent / 60.0)):
            length = float(rng.uniform(*cfg.fa_len))
            start = float(rng.uniform(0.0, max(extent - length, 0.0)))
            speaker = labels[rng.integers(len(labels))] if labels else "fa"
            turns.append(Turn(start, length, speaker, ref.recording))

    hyp = quantize(Hypothesis.from_turns(ref.recording, turns, source_id=ref.source_id))
    if cfg.relabel:
        names = [f"{cfg.label_prefix}{i:02d}" for i in range(len(hyp.speakers))]
        perm = rng.permutation(len(names))
        mapping = {s: names[p] for s, p in zip(sorted(hyp.speakers), perm)}
        hyp = hyp.relabel(mapping)
    return hyp


def make_ensemble(
    ref_cfg: SynthConfig, perturb_cfg: PerturbConfig, k: int, recording: str = "synth"
) -> tuple[Hypothesis, list[Hypothesis], list[int]]:
    """Reference plus ``k`` independently perturbed hypotheses.

    Perturbation seeds are derived from ``perturb_cfg.seed`` and returned.
    """
    ref = generate_reference(ref_cfg, recording)
    seeds = derive_seeds(perturb_cfg.seed, k)
    hyps = [
        replace(
            perturb(ref, replace(perturb_cfg, seed=s, label_prefix=f"{perturb_cfg.label_prefix}{i + 1}_")),
            source_id=f"hyp{i + 1}",
        )
        for i, s in enumerate(seeds)
    ]
    return ref, hyps, seeds

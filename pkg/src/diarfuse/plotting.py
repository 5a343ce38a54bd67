"""Figures written next to the CLI's text reports."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .rttm_io import Hypothesis  # noqa: E402
from .scoring import DERReport  # noqa: E402

LANE_HEIGHT = 0.8
DPI = 150

# MS / FA / Conf, kept fixed so figures of different runs compare at a glance
ERROR_COLORS = {"MS": "#4c72b0", "FA": "#dd8452", "Conf": "#c44e52"}


def _speaker_colors(labels):
    cmap = plt.get_cmap("tab20")
    return {label: cmap(i % 20) for i, label in enumerate(sorted(labels))}


def save_fig(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_timeline(rows: Sequence[tuple[str, Hypothesis]], path, title: str | None = None) -> Path:
    """One band per named hypothesis, one lane per speaker inside the band.

    Speakers with the same label share a colour across bands, which makes
    mapped inputs and the combined output directly comparable.
    """
    labels = sorted(set().union(*[h.speakers for _, h in rows])) if rows else []
    colors = _speaker_colors(labels)
    lanes = []
    for name, hyp in rows:
        for speaker in sorted(hyp.speakers) or ["-"]:
            lanes.append((name, speaker, hyp))
    height = max(2.0, 0.28 * len(lanes) + 1.0)
    fig, ax = plt.subplots(figsize=(10, height))
    yticks, ylabels = [], []
    for y, (name, speaker, hyp) in enumerate(reversed(lanes)):
        spans = [(t.start, t.duration) for t in hyp.turns if t.speaker == speaker]
        if spans:
            ax.broken_barh(spans, (y - LANE_HEIGHT / 2, LANE_HEIGHT), facecolors=colors[speaker])
        yticks.append(y)
        ylabels.append(f"{name}: {speaker}")
    prev = None
    for y, (name, _, _) in enumerate(reversed(lanes)):
        if prev is not None and name != prev:
            ax.axhline(y - 0.5, color="0.3", lw=0.8)
        prev = name
    ax.set_yticks(yticks)
    ax.set_yticklabels(ylabels, fontsize=7)
    ax.set_xlabel("time (s)")
    ax.set_ylim(-0.75, max(len(lanes), 1) - 0.25)
    if title:
        ax.set_title(title)
    return save_fig(fig, path)


def plot_der_breakdown(reports: Mapping[str, DERReport], path, title: str | None = None) -> Path:
    """Stacked MS / FA / Conf bars (percent) per recording."""
    names = list(reports)
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(names) + 2), 3.5))
    bottom = [0.0] * len(names)
    for key, attr in (("MS", "missed"), ("FA", "false_alarm"), ("Conf", "confusion")):
        vals = [100 * getattr(reports[n], attr) for n in names]
        ax.bar(names, vals, bottom=bottom, color=ERROR_COLORS[key], label=key)
        bottom = [b + v for b, v in zip(bottom, vals)]
    ax.set_ylabel("DER (%)")
    ax.legend(frameon=False, ncol=3, fontsize=8)
    ax.tick_params(axis="x", labelrotation=45, labelsize=7)
    if title:
        ax.set_title(title)
    return save_fig(fig, path)

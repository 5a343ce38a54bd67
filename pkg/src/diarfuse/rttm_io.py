"""Reading and writing diarization hypotheses in RTTM and UEM format.

RTTM lines look like::

    SPEAKER <file> <chan> <tbeg> <tdur> <ortho> <stype> <name> <conf> <slat>

Only ``SPEAKER`` records are kept; other record types and ``;;`` comments are
skipped.
"""

from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Union

from .errors import RTTMParseError, ValidationError

logger = logging.getLogger(__name__)

#: Tolerance (seconds) for every boundary comparison in the package.
EPSILON = 1e-6

TextSource = Union[str, bytes, IO[str], IO[bytes]]


@dataclass(frozen=True, order=True)
class Turn:
    """One contiguous interval of speech attributed to a single speaker."""

    start: float
    duration: float
    speaker: str
    recording: str = ""
    channel: str = "1"

    def __post_init__(self):
        if not self.speaker or any(c.isspace() for c in self.speaker):
            raise ValidationError(f"invalid speaker label {self.speaker!r}")
        if self.start < 0:
            raise ValidationError(f"turn of {self.speaker} starts before 0 ({self.start})")
        if not self.duration > 0:
            raise ValidationError(
                f"turn of {self.speaker} at {self.start} has non-positive duration {self.duration}"
            )

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class Hypothesis:
    """All speaker turns of one recording, as produced by one system.

    Build instances with :meth:`from_turns`, which enforces the invariants:
    turns sorted by (start, speaker) and turns of the same speaker pairwise
    disjoint (overlapping or abutting ones are merged). Turns of different
    speakers may overlap.
    """

    recording: str
    turns: tuple[Turn, ...] = ()
    source_id: str = ""

    @classmethod
    def from_turns(
        cls,
        recording: str,
        turns: Iterable[Turn],
        source_id: str = "",
        epsilon: float = EPSILON,
    ) -> "Hypothesis":
        by_speaker: dict[str, list[Turn]] = {}
        for t in turns:
            by_speaker.setdefault(t.speaker, []).append(t)
        merged: list[Turn] = []
        for speaker, group in by_speaker.items():
            group.sort(key=lambda t: (t.start, t.end, t.channel))
            cur_start, cur_end, chan = group[0].start, group[0].end, group[0].channel
            for t in group[1:]:
                if t.start <= cur_end + epsilon:
                    if t.end > cur_end:
                        cur_end = t.end
                    continue
                merged.append(_make_turn(speaker, cur_start, cur_end, recording, chan))
                cur_start, cur_end, chan = t.start, t.end, t.channel
            merged.append(_make_turn(speaker, cur_start, cur_end, recording, chan))
        merged.sort(key=lambda t: (t.start, t.speaker, t.duration))
        return cls(recording=recording, turns=tuple(merged), source_id=source_id)

    @property
    def speakers(self) -> frozenset[str]:
        return frozenset(t.speaker for t in self.turns)

    def __len__(self) -> int:
        return len(self.turns)

    def by_speaker(self) -> dict[str, list[Turn]]:
        out: dict[str, list[Turn]] = {}
        for t in self.turns:
            out.setdefault(t.speaker, []).append(t)
        return out

    def relabel(self, mapping: Mapping[str, str], source_id: str | None = None) -> "Hypothesis":
        turns = [
            Turn(t.start, t.duration, mapping[t.speaker], t.recording, t.channel)
            for t in self.turns
        ]
        return Hypothesis.from_turns(
            self.recording, turns, self.source_id if source_id is None else source_id
        )

    def extent(self) -> tuple[float, float]:
        if not self.turns:
            return (0.0, 0.0)
        return (min(t.start for t in self.turns), max(t.end for t in self.turns))


def _make_turn(speaker, start, end, recording, channel):
    return Turn(
        start=float(start), duration=float(end - start), speaker=speaker,
        recording=recording, channel=channel,
    )


def quantize(h: Hypothesis, precision: int = 3) -> Hypothesis:
    """Round every turn's start and end to ``precision`` decimals.

    The result equals ``parse_rttm(write_rttm(h, precision))``.
    """
    turns = []
    for t in h.turns:
        start, end = round(t.start, precision), round(t.end, precision)
        if end - start > 0:
            turns.append(Turn(start, round(end - start, precision), t.speaker, t.recording, t.channel))
    return Hypothesis.from_turns(h.recording, turns, source_id=h.source_id)


@dataclass(frozen=True)
class UEMRegion:
    recording: str
    start: float
    end: float
    channel: str = field(default="1", compare=False)

    def __post_init__(self):
        if not self.end > self.start:
            raise ValidationError(
                f"UEM region for {self.recording} has end {self.end} <= start {self.start}"
            )


def _read_text(source: TextSource) -> tuple[str, str | None]:
    """Return (text, name) for a path, raw text/bytes, or an open file."""
    if isinstance(source, bytes):
        return source.decode("utf-8"), None
    if isinstance(source, str):
        return source, None
    if isinstance(source, os.PathLike):
        with open(source, "r", encoding="utf-8") as fh:
            return fh.read(), os.fspath(source)
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data, getattr(source, "name", None)


def _float_field(value: str, what: str, lineno: int, source) -> float:
    try:
        x = float(value)
    except ValueError:
        raise RTTMParseError(f"cannot parse {what} {value!r}", lineno, source) from None
    if x != x or x in (float("inf"), float("-inf")):
        raise RTTMParseError(f"non-finite {what} {value!r}", lineno, source)
    return x


def parse_rttm(
    source: TextSource,
    source_id: str = "",
    on_invalid: str = "raise",
    epsilon: float = EPSILON,
) -> dict[str, Hypothesis]:
    """Parse RTTM text into one :class:`Hypothesis` per recording.

    ``source`` may be a string of RTTM text, bytes, a :class:`os.PathLike`
    or an open file. With ``on_invalid="warn"`` turns with non-positive
    duration or negative start are skipped with a warning instead of raising
    :class:`ValidationError`.
    """
    if on_invalid not in ("raise", "warn"):
        raise ValueError(f"on_invalid must be 'raise' or 'warn', not {on_invalid!r}")
    text, name = _read_text(source)
    where = name or source_id or None
    turns: dict[str, list[Turn]] = {}
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith(";;"):
            continue
        parts = line.split()
        if len(parts) < 9:
            raise RTTMParseError(
                f"expected at least 9 fields, found {len(parts)}", lineno, where
            )
        if parts[0] != "SPEAKER":
            continue
        recording, channel, speaker = parts[1], parts[2], parts[7]
        start = _float_field(parts[3], "tbeg", lineno, where)
        duration = _float_field(parts[4], "tdur", lineno, where)
        try:
            turn = Turn(start, duration, speaker, recording, channel)
        except ValidationError as exc:
            if on_invalid == "warn":
                logger.warning("%s:%d: skipping turn: %s", where or "<rttm>", lineno, exc)
                continue
            raise ValidationError(f"{where or '<rttm>'}:{lineno}: {exc}") from None
        turns.setdefault(recording, []).append(turn)
    return {
        rec: Hypothesis.from_turns(rec, ts, source_id=source_id, epsilon=epsilon)
        for rec, ts in sorted(turns.items())
    }


def load_rttm(path, **kwargs) -> dict[str, Hypothesis]:
    """Parse an RTTM file; ``source_id`` defaults to the path."""
    kwargs.setdefault("source_id", os.fspath(path))
    with open(path, "r", encoding="utf-8") as fh:
        return parse_rttm(fh, **kwargs)


def write_rttm(hypothesis: Hypothesis, precision: int = 3) -> str:
    """Serialize one hypothesis, one ``SPEAKER`` line per turn.

    Start and end are rounded to ``precision`` decimals and the duration is
    written as their difference, so abutting turns stay abutting. Turns that
    vanish under rounding are dropped.
    """
    lines = []
    for t in hypothesis.turns:
        start = round(t.start, precision)
        end = round(t.end, precision)
        if end - start <= 0:
            logger.debug("dropping %s turn at %.6f: shorter than output precision", t.speaker, t.start)
            continue
        lines.append(
            f"SPEAKER {hypothesis.recording} {t.channel} {start:.{precision}f} "
            f"{end - start:.{precision}f} <NA> <NA> {t.speaker} <NA> <NA>\n"
        )
    return "".join(lines)


def dump_rttm(hypotheses: Iterable[Hypothesis], precision: int = 3) -> str:
    """Serialize several recordings in sorted recording order."""
    return "".join(
        write_rttm(h, precision) for h in sorted(hypotheses, key=lambda h: h.recording)
    )


def parse_uem(source: TextSource) -> list[UEMRegion]:
    """Parse UEM lines ``<file> <chan> <tbeg> <tend>``."""
    text, name = _read_text(source)
    regions = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.strip()
        if not line or line.startswith(";;"):
            continue
        parts = line.split()
        if len(parts) < 4:
            raise RTTMParseError(f"UEM line needs 4 fields, found {len(parts)}", lineno, name)
        start = _float_field(parts[2], "tbeg", lineno, name)
        end = _float_field(parts[3], "tend", lineno, name)
        try:
            regions.append(UEMRegion(parts[0], start, end, parts[1]))
        except ValidationError as exc:
            raise ValidationError(f"{name or '<uem>'}:{lineno}: {exc}") from None
    return regions


def load_uem(path) -> list[UEMRegion]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_uem(fh)

"""Command-line interface: ``combine``, ``score``, ``synth`` and ``inspect``.

Exit codes: 0 success, 2 usage, 3 unreadable file, 4 parse error,
5 validation error, 6 tensor capacity exceeded, 7 inconsistent recordings,
8 undefined metric.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .combine import METHODS, CombineOptions, combine_recordings
from .errors import (
    CapacityError,
    InconsistentRecordingsError,
    RTTMParseError,
    UndefinedMetricError,
    ValidationError,
)
from .mapping import DEFAULT_TUPLE_BUDGET, RANK_CRITERIA
from .rttm_io import EPSILON, Hypothesis, dump_rttm, load_rttm, load_uem, write_rttm
from .scoring import DERReport, der
from .synth import PerturbConfig, SynthConfig, make_ensemble
from .timeline import build_regions, overlap_stats

logger = logging.getLogger("diarfuse")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PARSE = 4
EXIT_VALIDATION = 5
EXIT_CAPACITY = 6
EXIT_INCONSISTENT = 7
EXIT_METRIC = 8


def _pct(x: float) -> str:
    return f"{100 * x:.2f}%"


def _figure_name(recording: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in recording) or "recording"


def cmd_combine(args) -> int:
    inputs = [load_rttm(p) for p in args.inputs]
    if args.weight:
        weighting = args.weight
        if len(weighting) != len(args.inputs):
            print(
                f"error: {len(weighting)} --weight values for {len(args.inputs)} inputs",
                file=sys.stderr,
            )
            return EXIT_USAGE
    else:
        weighting = args.weighting
    opts = CombineOptions(
        method=args.method,
        weighting=weighting,
        rank_criterion=args.rank_criterion,
        epsilon=args.epsilon,
        tuple_budget=args.tuple_budget,
    )
    results = combine_recordings(inputs, opts, strict=args.strict)
    text = dump_rttm([c.hypothesis for c in results.values()], precision=args.precision)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.figure_dir:
        from .plotting import plot_timeline

        for rec, c in results.items():
            rows = [(f"in{k + 1}", h) for k, h in enumerate(c.mapped)]
            rows.append((args.method, c.hypothesis))
            plot_timeline(rows, Path(args.figure_dir) / f"{_figure_name(rec)}.png", title=rec)
    return EXIT_OK


def cmd_score(args) -> int:
    refs = load_rttm(args.reference)
    hyps = load_rttm(args.hypothesis)
    uem = load_uem(args.uem) if args.uem else None
    for rec in sorted(set(hyps) - set(refs)):
        logger.warning("recording %r has no reference; not scored", rec)
    reports: dict[str, DERReport] = {}
    for rec, ref in refs.items():
        hyp = hyps.get(rec, Hypothesis(rec))
        reports[rec] = der(
            ref, hyp, collar=args.collar, uem=uem,
            single_speaker_only=args.single_speaker_only, epsilon=args.epsilon,
        )
    lines = ["recording\tMS\tFA\tConf\tDER\tscored_s"]
    rows = list(reports.items()) + [("OVERALL", DERReport.aggregate(reports.values()))]
    for name, r in rows:
        lines.append(
            f"{name}\t{_pct(r.missed)}\t{_pct(r.false_alarm)}\t{_pct(r.confusion)}"
            f"\t{_pct(r.der)}\t{r.scored_time:.3f}"
        )
    print("\n".join(lines))
    if args.figure_dir:
        from .plotting import plot_der_breakdown

        plot_der_breakdown(
            dict(rows), Path(args.figure_dir) / "der_breakdown.png", title=Path(args.hypothesis).name
        )
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ref_cfg = SynthConfig(
        n_speakers=args.n_speakers,
        duration=args.duration,
        target_overlap=args.overlap,
        turn_len=(args.turn_min, args.turn_max),
        seed=args.seed,
    )
    pcfg = PerturbConfig(
        boundary_jitter_sd=args.jitter_sd,
        miss_prob=args.miss_prob,
        fa_rate=args.fa_rate,
        confusion_prob=args.confusion_prob,
        relabel=args.relabel,
        seed=args.seed,
    )
    ref, hyps, seeds = make_ensemble(ref_cfg, pcfg, args.k, recording=args.recording)
    manifest = []
    ref_path = out / "ref.rttm"
    ref_path.write_text(write_rttm(ref), encoding="utf-8")
    manifest.append(f"reference\t{ref_path}\t{args.seed}")
    for i, (h, s) in enumerate(zip(hyps, seeds), start=1):
        p = out / f"hyp{i}.rttm"
        p.write_text(write_rttm(h), encoding="utf-8")
        manifest.append(f"hyp{i}\t{p}\t{s}")
    (out / "manifest.txt").write_text("\n".join(manifest) + "\n", encoding="utf-8")
    print("\n".join(manifest))
    return EXIT_OK


def cmd_inspect(args) -> int:
    inputs = [load_rttm(p) for p in args.inputs]
    print("input\trecording\tspeakers\tspeech_s\toverlap_s\toverlap_fraction\tregions")
    for path, parsed in zip(args.inputs, inputs):
        for rec, h in parsed.items():
            st = overlap_stats(h, args.epsilon)
            n_regions = len(build_regions([h], epsilon=args.epsilon))
            print(
                f"{path}\t{rec}\t{st.speakers}\t{st.speech:.3f}\t{st.overlap:.3f}"
                f"\t{st.overlap_fraction:.3f}\t{n_regions}"
            )
            if args.figure_dir:
                from .plotting import plot_timeline

                name = f"{_figure_name(Path(path).stem)}_{_figure_name(rec)}.png"
                plot_timeline([(Path(path).stem, h)], Path(args.figure_dir) / name, title=rec)
    if args.show_mapping and len(inputs) > 1:
        opts = CombineOptions(
            method=args.method, weighting="uniform",
            epsilon=args.epsilon, tuple_budget=args.tuple_budget,
        )
        for rec, c in combine_recordings(inputs, opts).items():
            print(f";; mapping {rec} ({args.method})")
            sys.stdout.write(c.mapping.to_text())
    return EXIT_OK


def _positive_float(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return x


def _nonneg_float(text):
    x = float(text)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return x


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diarfuse", description="Combine and score speaker diarization outputs."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--epsilon", type=_positive_float, default=EPSILON,
                       help="boundary tolerance in seconds (default: %(default)g)")

    p = sub.add_parser("combine", help="combine RTTM hypotheses into one")
    p.add_argument("inputs", nargs="+", help="RTTM files, one per system or channel")
    p.add_argument("--method", choices=METHODS, default="doverlap")
    p.add_argument("--weight", type=_positive_float, action="append",
                   help="custom weight per input, in input order (repeatable)")
    p.add_argument("--weighting", choices=("rank", "uniform"), default="rank",
                   help="ignored when --weight is given")
    p.add_argument("--rank-criterion", choices=RANK_CRITERIA, default=None,
                   help="default: avg_der for dover, total_relative_overlap otherwise")
    p.add_argument("--tuple-budget", type=int, default=DEFAULT_TUPLE_BUDGET)
    p.add_argument("--strict", action="store_true",
                   help="fail when a recording is missing from some inputs")
    p.add_argument("--precision", type=int, default=3)
    p.add_argument("-o", "--output", help="output RTTM (default: stdout)")
    p.add_argument("--figure-dir", help="write one timeline PNG per recording here")
    common(p)
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("score", help="compute DER of a hypothesis against a reference")
    p.add_argument("reference")
    p.add_argument("hypothesis")
    p.add_argument("--collar", type=_nonneg_float, default=0.0)
    p.add_argument("--uem")
    p.add_argument("--single-speaker-only", action="store_true",
                   help="score only where the reference has at most one speaker")
    p.add_argument("--figure-dir", help="write der_breakdown.png here")
    common(p)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("synth", help="write a synthetic reference and perturbed hypotheses")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--recording", default="synth")
    p.add_argument("--n-speakers", type=int, default=4)
    p.add_argument("--duration", type=_positive_float, default=600.0)
    p.add_argument("--overlap", type=float, default=0.2, help="target overlap fraction")
    p.add_argument("--turn-min", type=_positive_float, default=1.0)
    p.add_argument("--turn-max", type=_positive_float, default=8.0)
    p.add_argument("-k", "--k", type=int, default=3, help="number of hypotheses")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jitter-sd", type=_nonneg_float, default=0.25)
    p.add_argument("--miss-prob", type=float, default=0.05)
    p.add_argument("--fa-rate", type=_nonneg_float, default=0.5, help="spurious turns per minute")
    p.add_argument("--confusion-prob", type=float, default=0.1)
    p.add_argument("--relabel", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("inspect", help="summarize RTTM files")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--show-mapping", action="store_true",
                   help="with several inputs, print the label mapping per recording")
    p.add_argument("--method", choices=METHODS, default="doverlap")
    p.add_argument("--tuple-budget", type=int, default=DEFAULT_TUPLE_BUDGET)
    p.add_argument("--figure-dir", help="write one timeline PNG per input and recording")
    common(p)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except RTTMParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InconsistentRecordingsError as exc:
        print(f"inconsistent recordings: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except UndefinedMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_METRIC
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

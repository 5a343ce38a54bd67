from diarfuse.plotting import plot_der_breakdown, plot_timeline
from diarfuse.rttm_io import Hypothesis
from diarfuse.scoring import DERReport
from helpers import make_hyp

PNG = b"\x89PNG\r\n\x1a\n"


def test_timeline_png(tmp_path):
    rows = [("h1", make_hyp([("A", 0, 2), ("B", 1, 3)])), ("empty", Hypothesis("rec1"))]
    path = plot_timeline(rows, tmp_path / "sub" / "t.png", title="rec1")
    assert path.read_bytes()[:8] == PNG


def test_timeline_no_rows(tmp_path):
    assert plot_timeline([], tmp_path / "none.png").exists()


def test_der_breakdown_png(tmp_path):
    reports = {"r1": DERReport(1.0, 0.5, 0.2, 10.0), "OVERALL": DERReport(1.0, 0.5, 0.2, 10.0)}
    assert plot_der_breakdown(reports, tmp_path / "d.png").read_bytes()[:8] == PNG

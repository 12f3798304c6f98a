import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdrcf import BoundingBox, FrameRecord
from mdrcf.bench import metrics
from mdrcf.bench.dataset import Sequence, load_dataset, load_sequence, parse_groundtruth
from mdrcf.bench.results import ConfigHashMismatch, read_results, write_results
from mdrcf.bench.runner import run_bench, tracker_configs
from mdrcf.cli import main
from mdrcf.errors import InvalidParameterError, SequenceFormatError
from mdrcf.synthetic import translating_square, write_sequence, write_toy_dataset
from mdrcf.tracker import VARIANTS


def toy_sequence(path, n=3):
    frames, boxes = translating_square(n, frame_size=(120, 100), side=20, start=(30, 40))
    return write_sequence(path, frames, boxes)


# -- dataset I/O -------------------------------------------------------------------------

def test_load_sequence(tmp_path):
    seq = load_sequence(toy_sequence(tmp_path / "sq"))
    assert len(seq) == 3 and seq.name == "sq"
    assert seq.boxes[0] == BoundingBox(30, 40, 20, 20)


def test_one_based_conversion(tmp_path):
    p = tmp_path / "gt.txt"
    p.write_text("10,20,30,40\n10\t20\t30\t40\n10 20 30 40\n")
    assert parse_groundtruth(p) == [BoundingBox(9, 19, 30, 40)] * 3


def test_unparsable_line_number(tmp_path):
    p = tmp_path / "gt.txt"
    p.write_text("1,2,3,4\n1,2,x,4\n")
    with pytest.raises(SequenceFormatError, match=":2:"):
        parse_groundtruth(p)


def test_count_mismatch_names_both(tmp_path):
    d = toy_sequence(tmp_path / "sq")
    (d / "groundtruth_rect.txt").write_text("1,1,5,5\n1,1,5,5\n")
    with pytest.raises(SequenceFormatError, match="3 frames but 2"):
        load_sequence(d)


def test_absent_annotation_is_none(tmp_path):
    p = tmp_path / "gt.txt"
    p.write_text("1,1,5,5\n0,0,0,0\nNaN,NaN,NaN,NaN\n")
    boxes = parse_groundtruth(p)
    assert boxes[0] is not None and boxes[1] is None and boxes[2] is None


def test_frames_sorted_numerically(tmp_path):
    d = toy_sequence(tmp_path / "sq", 3)
    img = d / "img"
    (img / "0003.png").rename(img / "10.png")
    seq = load_sequence(d)
    assert [p.name for p in seq.frames] == ["0001.png", "0002.png", "10.png"]


def test_empty_dataset(tmp_path):
    with pytest.raises(SequenceFormatError):
        load_dataset(tmp_path)


def test_dataset_manifest(tmp_path):
    write_toy_dataset(tmp_path, 4)
    seqs = load_dataset(tmp_path)
    assert [s.name for s in seqs] == ["square", "zoom"]
    assert seqs[1].attributes == ("SV", "BC")


# -- metrics ---------------------------------------------------------------------------------

def test_center_error():
    b = BoundingBox(0, 0, 10, 10)
    assert metrics.center_error(b, b) == 0
    assert metrics.center_error(BoundingBox(3, 4, 10, 10), b) == 5


@settings(max_examples=50, deadline=None)
@given(*[st.floats(-100, 100) for _ in range(4)], *[st.floats(0.5, 50) for _ in range(4)])
def test_center_error_formula(x1, y1, x2, y2, w1, h1, w2, h2):
    a, b = BoundingBox(x1, y1, w1, h1), BoundingBox(x2, y2, w2, h2)
    expected = math.hypot(x1 + w1 / 2 - x2 - w2 / 2, y1 + h1 / 2 - y2 - h2 / 2)
    assert metrics.center_error(a, b) == pytest.approx(expected)


def test_iou_examples():
    b = BoundingBox(0, 0, 10, 10)
    assert metrics.iou(b, b) == 1.0
    assert metrics.iou(b, BoundingBox(20, 20, 10, 10)) == 0.0
    assert metrics.iou(b, BoundingBox(5, 0, 10, 10)) == pytest.approx(1 / 3)


@settings(max_examples=50, deadline=None)
@given(*[st.floats(-50, 50) for _ in range(4)], *[st.floats(0.5, 50) for _ in range(4)])
def test_iou_bounded_symmetric(x1, y1, x2, y2, w1, h1, w2, h2):
    a, b = BoundingBox(x1, y1, w1, h1), BoundingBox(x2, y2, w2, h2)
    v = metrics.iou(a, b)
    assert 0.0 <= v <= 1.0 + 1e-12 and v == pytest.approx(metrics.iou(b, a))


def test_perfect_predictions():
    boxes = [BoundingBox(i, i, 10, 10) for i in range(5)]
    c = metrics.eval_curves(boxes, boxes)
    assert np.all(c.precision == 1.0)
    assert np.all(c.success[:-1] == 1.0) and c.success[-1] == 0.0
    assert c.auc == pytest.approx(20 / 21)


def test_all_far_off():
    gts = [BoundingBox(0, 0, 10, 10)] * 4
    preds = [BoundingBox(200, 200, 10, 10)] * 4
    c = metrics.eval_curves(preds, gts)
    assert np.all(c.precision == 0) and np.all(c.success == 0) and c.auc == 0


def test_four_frame_oracle():
    gts = [BoundingBox(0, 0, 10, 10)] * 4
    preds = gts[:2] + [BoundingBox(300, 300, 10, 10)] * 2
    c = metrics.eval_curves(preds, gts)
    assert c.precision_at_20 == 0.5
    assert c.auc == pytest.approx(0.5 * metrics.eval_curves(gts[:2], gts[:2]).auc)


def test_missing_annotations_skipped_and_empty_rejected():
    gts = [BoundingBox(0, 0, 10, 10), None]
    c = metrics.eval_curves([gts[0], BoundingBox(99, 99, 1, 1)], gts)
    assert c.num_frames == 1 and c.precision_at_20 == 1.0
    with pytest.raises(InvalidParameterError):
        metrics.eval_curves([BoundingBox(0, 0, 1, 1)], [None])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 200), st.floats(0, 1)), min_size=1, max_size=30))
def test_curves_monotone(samples):
    errors, overlaps = zip(*samples)
    c = metrics.curves_from_errors(errors, overlaps)
    assert np.all(np.diff(c.precision) >= 0) and np.all(np.diff(c.success) <= 0)
    assert np.all((c.precision >= 0) & (c.precision <= 1))


def _curves(auc):
    return metrics.EvalCurves(np.zeros(51), np.zeros(21), 0.0, 0.0, auc, 1)


def test_attribute_table():
    seqs = [Sequence("a", [], [], ("IV",)), Sequence("b", [], [], ("IV", "OCC"))]
    table = metrics.aggregate_by_attribute({"a": _curves(0.6), "b": _curves(0.2)}, seqs)
    assert table["IV"] == pytest.approx(0.4) and table["OCC"] == 0.2
    assert table["LR"] is None
    one = metrics.aggregate_by_attribute({"a": _curves(0.6)}, seqs[:1])
    assert one["IV"] == 0.6
    with pytest.raises(InvalidParameterError):
        metrics.aggregate_by_attribute({"a": _curves(0.6)}, [Sequence("a", [], [], ("XX",))])


# -- result files ----------------------------------------------------------------------------------

def _records():
    return [
        FrameRecord(1, 1.5, 2.0, 10.0, 12.0, 1.0),
        FrameRecord(2, 1.6, 2.1, 10.2, 12.24, 1.02, 0.01, 0.9, 0.1, 12.345678901234567, True, None, ""),
        FrameRecord(3, 1.7, 2.2, 10.2, 12.24, 1.02, 0.02, 0.5, 0.3, 1.6, False, 0.25, "high_alpha"),
    ]


def test_results_round_trip(tmp_path):
    p = tmp_path / "r.csv"
    write_results(p, _records(), "abc", "MDRCF")
    assert read_results(p, "abc") == _records()


def test_results_hash_mismatch_warns(tmp_path):
    p = tmp_path / "r.csv"
    write_results(p, _records(), "abc")
    with pytest.warns(ConfigHashMismatch):
        recs = read_results(p, "def")
    assert len(recs) == 3


def test_results_missing(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_results(tmp_path / "nope.csv")


# -- runner and CLI --------------------------------------------------------------------------------

def test_cli_track(tmp_path, capsys):
    d = toy_sequence(tmp_path / "sq")
    cfg = tmp_path / "c.json"
    cfg.write_text('{"eta": 0.02}')
    out = tmp_path / "out.csv"
    assert main(["track", "--seq", str(d), "--config", str(cfg), "--variant", "MDRCF", "--out", str(out), "--gt-init"]) == 0
    recs = read_results(out)
    assert len(recs) == 3 and recs[0].box == BoundingBox(30, 40, 20, 20)


def test_cli_missing_seq(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["track", "--variant", "MDRCF", "--out", str(tmp_path / "o.csv")])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_cli_unknown_variant(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["track", "--seq", str(tmp_path), "--variant", "KCF", "--out", str(tmp_path / "o.csv")])
    assert exc.value.code == 2
    err = capsys.readouterr().err
    assert all(v in err for v in VARIANTS)


def test_cli_runtime_error_exit_1(tmp_path, capsys):
    assert main(["track", "--seq", str(tmp_path / "none"), "--out", str(tmp_path / "o.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_cli_bench(tmp_path, capsys):
    data = write_toy_dataset(tmp_path / "data", 4)
    out = tmp_path / "out"
    assert main(["bench", "--dataset", str(data), "--variants", "MDRCF,Staple_baseline", "--out", str(out)]) == 0
    assert sorted(p.relative_to(out).as_posix() for p in out.glob("*/*.csv") if p.parent.name != "curves") == [
        "MDRCF/square.csv", "MDRCF/zoom.csv", "Staple_baseline/square.csv", "Staple_baseline/zoom.csv"]
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("tracker,") and len(summary) == 3
    assert (out / "attributes.csv").is_file()
    assert (out / "curves" / "MDRCF_precision.csv").is_file()
    first = (out / "summary.csv").read_text()
    # stored results reproduce the tables without tracking
    assert main(["bench", "--dataset", str(data), "--variants", "MDRCF,Staple_baseline", "--out", str(out),
                 "--results-only"]) == 0
    assert (out / "summary.csv").read_text() == first


def test_cli_bench_empty_dataset(tmp_path, capsys):
    assert main(["bench", "--dataset", str(tmp_path), "--variants", "MDRCF", "--out", str(tmp_path / "o")]) == 1


def test_confidence_comparison_mode(tmp_path, capsys):
    data = write_toy_dataset(tmp_path / "data", 4)
    out = tmp_path / "out"
    assert main(["bench", "--dataset", str(data), "--variants", "Staple_baseline", "--gates", "psr,apce,psmd",
                 "--out", str(out)]) == 0
    rows = [line.split(",")[0] for line in (out / "summary.csv").read_text().splitlines()[1:]]
    assert rows == ["Staple_baseline+apce", "Staple_baseline+psmd", "Staple_baseline+psr"]


def test_tracker_configs_labels():
    cfgs = tracker_configs(["MDRCF"], gates=["psr", "none"])
    assert set(cfgs) == {"MDRCF+psr", "MDRCF+none"} and cfgs["MDRCF+psr"].gate == "psr"


@pytest.mark.slow
def test_parallel_matches_serial(tmp_path):
    data = write_toy_dataset(tmp_path / "data", 4)
    cfgs = tracker_configs(["MDRCF", "EAMStaple"])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        run_bench(load_dataset(data), cfgs, tmp_path / "j1", jobs=1)
        run_bench(load_dataset(data), cfgs, tmp_path / "j2", jobs=2)
    assert (tmp_path / "j1" / "summary.csv").read_bytes() == (tmp_path / "j2" / "summary.csv").read_bytes()

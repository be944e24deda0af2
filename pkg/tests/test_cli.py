import csv
import io
import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptolemy_constants.cli import main
from ptolemy_constants.curves import Ellipse
from ptolemy_constants.experiments import (
    CSV_COLUMNS,
    SweepRecord,
    fmt,
    limit_table,
    read_sweep_csv,
    write_sweep_csv,
)
from ptolemy_constants.optimizer import estimate_ptolemy_constant

FAST = ["--grid", "16", "--starts", "3"]


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def exit_code(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    capsys.readouterr()
    return code


class TestEstimate:
    def test_ellipse_json(self, capsys):
        code, out, _ = run(["estimate", "--curve", "ellipse:0.8"], capsys)
        assert code == 0
        d = json.loads(out)
        assert d["estimate"] == pytest.approx(1.1333333, abs=1e-6)
        assert d["closed_form"] == pytest.approx(1.1333333, abs=1e-7)
        assert d["lower_bound"] == pytest.approx(1.1333333, abs=1e-7)
        assert d["upper_bound"] == pytest.approx(1.2360680, abs=1e-7)
        for key in ("value", "argmax", "status", "grid_best", "refinements_run", "extrapolation_detail"):
            assert key in d

    def test_circle(self, capsys):
        code, out, _ = run(["estimate", "--curve", "ellipse:0"] + FAST, capsys)
        assert code == 0
        assert json.loads(out)["estimate"] == pytest.approx(1.0, abs=1e-9)

    def test_reuleaux_has_no_closed_form(self, capsys):
        code, out, _ = run(["estimate", "--curve", "reuleaux"] + FAST, capsys)
        d = json.loads(out)
        assert code == 0
        assert "closed_form" not in d
        assert d["status"] in ("InteriorMaximum", "DegenerateLimit")

    def test_global_flags_before_subcommand(self, capsys):
        code, out, _ = run(FAST + ["estimate", "--curve", "polygon:5"], capsys)
        assert code == 0
        assert json.loads(out)["value"] >= 1.0

    def test_csv_format(self, capsys):
        code, out, _ = run(["estimate", "--curve", "rectangle:0.5", "--format", "csv"] + FAST, capsys)
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 1 and rows[0]["status"] == "DegenerateLimit"

    def test_numerical_failure_exit(self, capsys, monkeypatch):
        from ptolemy_constants import optimizer

        def broken(*a, **k):
            raise optimizer.NumericalFailure("boom")

        monkeypatch.setattr(optimizer, "refine_local", broken)
        code, out, _ = run(["estimate", "--curve", "ellipse:0.5"] + FAST, capsys)
        assert code == 3
        assert json.loads(out)["status"] == "GridOnly"


class TestExitCodes:
    @pytest.mark.parametrize(
        "argv",
        [
            ["estimate", "--curve", "blob"],
            ["estimate", "--curve", "ellipse:1.2"],
            ["estimate", "--curve", "convex:0,0;1,1"],
            ["estimate"],
            ["estimate", "--curve", "ellipse:0.5", "--grid", "4"],
            ["sweep", "--curve", "ellipse", "--eps-min", "0.5", "--eps-max", "0.2", "--steps", "3"],
            ["sweep", "--curve", "ellipse", "--eps-min", "0", "--eps-max", "0.2", "--steps", "0"],
            ["hessian", "--eps", "1"],
            ["hessian", "--eps", "0.5", "--step", "-1"],
            ["limit", "--eps", "0.9"],
            ["limit", "--eps", "0", "--factor", "2"],
            ["limit", "--eps", "0", "--delta-start", "5"],
            ["open", "--curve", "hexagon"],
            ["bogus"],
        ],
    )
    def test_usage_errors(self, argv, capsys):
        assert exit_code(argv, capsys) == 2

    def test_unwritable_out(self, capsys):
        argv = ["sweep", "--curve", "ellipse", "--eps-min", "0", "--eps-max", "0", "--steps", "1",
                "--out", "/nonexistent/dir/x.csv"] + FAST
        assert exit_code(argv, capsys) == 2

    @settings(max_examples=40, deadline=None)
    @given(st.text(min_size=1, max_size=20).filter(lambda s: not s.startswith("-")))
    def test_malformed_curve_strings_exit_2(self, text):
        from ptolemy_constants.curves import InvalidCurve, parse_curve

        try:
            parse_curve(text)
        except InvalidCurve:
            with pytest.raises(SystemExit) as exc:
                main(["estimate", "--curve", text])
            assert exc.value.code == 2

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "ptolemy_constants", "estimate", "--curve", "nope"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 2
        assert "unknown curve" in proc.stderr


class TestSweep:
    def test_ellipse_rows(self, tmp_path, capsys):
        path = tmp_path / "e.csv"
        code, out, _ = run(
            ["sweep", "--curve", "ellipse", "--eps-min", "0", "--eps-max", "0.9", "--steps", "10",
             "--out", str(path)] + FAST,
            capsys,
        )
        assert code == 0
        text = path.read_text()
        assert text.splitlines()[0] == ",".join(CSV_COLUMNS)
        recs = read_sweep_csv(text)
        assert len(recs) == 10
        assert [r.eps for r in recs] == pytest.approx([k / 10 for k in range(10)])
        assert recs[8].closed_form == pytest.approx(17 / 15, abs=1e-9)
        assert out.startswith("max_abs_error=")

    def test_rectangle_branch_switch(self, tmp_path, capsys):
        path = tmp_path / "r.csv"
        code, _, _ = run(
            ["sweep", "--curve", "rectangle", "--eps-min", "0.8", "--eps-max", "0.95", "--steps", "4",
             "--out", str(path)] + FAST,
            capsys,
        )
        assert code == 0
        recs = read_sweep_csv(path.read_text())
        below = [r for r in recs if r.eps < math.sqrt(3) / 2]
        above = [r for r in recs if r.eps > math.sqrt(3) / 2]
        assert below and above
        assert all(r.closed_form == pytest.approx(math.sqrt(2), abs=1e-9) for r in below)
        assert all(r.closed_form > math.sqrt(2) + 1e-3 for r in above)
        assert all(r.upper_bound is None for r in recs)

    def test_threshold_note(self, capsys):
        eps = repr(math.sqrt(3) / 2)
        code, out, err = run(
            ["sweep", "--curve", "rectangle", "--eps-min", eps, "--eps-max", eps, "--steps", "1"] + FAST,
            capsys,
        )
        assert code == 0
        assert len(list(csv.DictReader(io.StringIO(out)))) == 1
        assert "square_branch=1.414213562" in err and "long_branch=1.414213562" in err

    def test_single_step(self, capsys):
        code, out, _ = run(
            ["sweep", "--curve", "ellipse", "--eps-min", "0.3", "--eps-max", "0.6", "--steps", "1"] + FAST,
            capsys,
        )
        recs = read_sweep_csv(out)
        assert code == 0 and len(recs) == 1 and recs[0].eps == pytest.approx(0.3)

    def test_deterministic_except_seconds(self, tmp_path, capsys):
        outs = []
        for k in range(2):
            path = tmp_path / f"s{k}.csv"
            run(["sweep", "--curve", "rectangle", "--eps-min", "0", "--eps-max", "0.9", "--steps", "3",
                 "--out", str(path)] + FAST, capsys)
            rows = list(csv.reader(path.open()))
            outs.append([row[:-1] for row in rows])
        assert outs[0] == outs[1]

    def test_json_format(self, capsys):
        code, out, _ = run(
            ["sweep", "--curve", "ellipse", "--eps-min", "0.5", "--eps-max", "0.5", "--steps", "1",
             "--format", "json"] + FAST,
            capsys,
        )
        d = json.loads(out)
        assert code == 0 and d["records"][0]["abs_error"] <= 1e-6


class TestSweepRecord:
    def test_csv_roundtrip(self):
        r = estimate_ptolemy_constant(Ellipse(0.6), __import__("ptolemy_constants").OptimizeOptions(grid_points=12, starts=2))
        rec = SweepRecord.from_estimate(Ellipse(0.6), r, 0.123)
        buf = io.StringIO()
        write_sweep_csv([rec], buf)
        back = read_sweep_csv(buf.getvalue())[0]
        assert back.row() == rec.row()
        assert back.abs_error == pytest.approx(rec.abs_error, abs=1e-9)

    @settings(max_examples=50)
    @given(
        st.floats(0, 0.999),
        st.floats(1, 100),
        st.one_of(st.none(), st.floats(1, 100)),
        st.lists(st.floats(0, 1, exclude_max=True), min_size=4, max_size=4),
    )
    def test_roundtrip_at_ten_digits(self, eps, est, closed, ts):
        rec = SweepRecord("ellipse:x", eps, est, closed, closed, None, "InteriorMaximum", tuple(ts), est, 1.5)
        back = read_sweep_csv(_csv([rec]))[0]
        assert back.row() == rec.row()
        assert back.closed_form is None if closed is None else back.closed_form == pytest.approx(closed, rel=1e-9)

    def test_fmt(self):
        assert fmt(1 / 3) == "0.3333333333"
        assert fmt(2.5e-12) == "2.5e-12"
        assert fmt(None) == ""


def _csv(records):
    buf = io.StringIO()
    write_sweep_csv(records, buf)
    return buf.getvalue()


class TestHessian:
    def test_eps_06(self, capsys):
        code, out, _ = run(["hessian", "--eps", "0.6"], capsys)
        d = json.loads(out)
        assert code == 0
        assert d["max_diff"] <= 1e-4
        assert d["classification_closed_form"] == "Maximum"
        assert d["classification_finite_difference"] == "Maximum"

    def test_eps_0(self, capsys):
        d = json.loads(run(["hessian", "--eps", "0"], capsys)[1])
        assert d["classification_closed_form"] == "Inconclusive"
        assert d["classification_finite_difference"] == "Inconclusive"
        assert max(abs(v) for row in d["closed_form"] for v in row) == 0.0
        assert max(abs(v) for row in d["finite_difference"] for v in row) <= 1e-8

    def test_gradient(self, capsys):
        d = json.loads(run(["hessian", "--eps", "0.9", "--step", "1e-3"], capsys)[1])
        assert d["gradient_norm"] <= 1e-6


class TestLimit:
    def test_table(self, capsys):
        code, out, _ = run(["limit", "--eps", "0", "--delta-start", "0.1", "--factor", "0.5", "--count", "10"], capsys)
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "delta,ratio,abs_gap"
        rows = [tuple(map(float, ln.split(","))) for ln in lines[1:-1]]
        assert len(rows) == 10
        assert rows[-1][2] <= 1e-3
        assert lines[-1].startswith("# monotone=true order=")
        assert float(lines[-1].split("order=")[1]) == pytest.approx(1.0, abs=0.2)

    def test_first_branch_eps(self):
        t = limit_table(0.5, 0.1, 0.5, 20)
        assert t.monotone
        assert t.ratios[-1] == pytest.approx(math.sqrt(2), abs=1e-6)

    def test_single_row(self, capsys):
        d = json.loads(run(["limit", "--eps", "0", "--count", "1", "--format", "json"], capsys)[1])
        assert len(d["rows"]) == 1 and d["order"] is None


class TestOpen:
    def test_control_case(self, capsys):
        code, out, _ = run(["open", "--curve", "ellipse:0.5", "--seeds", "3"] + FAST, capsys)
        d = json.loads(out)
        assert code == 0
        assert d["values"] == pytest.approx([1.0103630] * 3, abs=1e-6)
        assert d["seeds"] == [0, 1, 2]
        assert not d["unstable"]

    def test_hexagon(self, capsys):
        code, out, _ = run(["open", "--curve", "polygon:6", "--seeds", "2"] + FAST, capsys)
        d = json.loads(out)
        assert code == 0 and d["best_value"] >= 1.0 and d["spread"] <= 1e-5

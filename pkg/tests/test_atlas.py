import csv
import json
import math
import xml.etree.ElementTree as ET

import pytest

from ortho3r.atlas.cli import main
from ortho3r.atlas.verify import PAPER_EXAMPLES
from ortho3r.model import DesignParams
from ortho3r.singular import trace_section_curves


def run(argv):
    try:
        return main(argv)
    except SystemExit as exc:
        return int(exc.code or 0)


PARAMS_A3 = ["--d2", "0", "--d3", "2", "--d4", "3", "--r2", "1", "--r3", "0"]


class TestClassifyCommand:
    def test_text_output(self, capsys):
        assert run(["classify", *PARAMS_A3, "--grid", "256"]) == 0
        out = capsys.readouterr().out
        assert "label: A3" in out
        assert "class_rank: 2" in out
        assert "node_count: 4" in out

    def test_first_class_group(self, capsys):
        argv = ["classify", "--d2", "0", "--d3", "0", "--d4", "2",
                "--r2", "1.5", "--r3", "0", "--grid", "256"]
        assert run(argv) == 0
        out = capsys.readouterr().out
        assert "label: C" in out and "class_rank: 1" in out

    def test_out_of_family_exit_code(self, capsys):
        argv = ["classify", "--d2", "1", "--d3", "2", "--d4", "1",
                "--r2", "1", "--r3", "0"]
        assert run(argv) == 2

    def test_invalid_parameters_exit_code(self, capsys):
        argv = ["classify", "--d2", "0", "--d3", "2", "--d4", "-1",
                "--r2", "1", "--r3", "0"]
        assert run(argv) == 1
        argv = ["classify", "--d2", "0", "--d3", "2"]
        assert run(argv) == 1

    def test_json_report(self, capsys):
        assert run(["classify", *PARAMS_A3, "--grid", "256", "--json"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["label"] == "A3"
        assert rep["params"]["d4"] == 3.0
        assert rep["metrics"]["node_count"] == 4
        assert len(rep["nodes"]) == 4
        assert rep["grid"]["resolution"] == 256
        assert rep["family_case"] == "A"


class TestAnalyzeCommand:
    def test_outputs_and_determinism(self, tmp_path, capsys):
        argv = ["analyze", "--d2", "1", "--d3", "0", "--d4", "2",
                "--r2", "0", "--r3", "1", "--grid", "128",
                "--out", str(tmp_path / "run1")]
        assert run(argv) == 0
        argv2 = list(argv)
        argv2[-1] = str(tmp_path / "run2")
        assert run(argv2) == 0
        rep1 = (tmp_path / "run1" / "report.json").read_bytes()
        rep2 = (tmp_path / "run2" / "report.json").read_bytes()
        assert rep1 == rep2
        svg1 = (tmp_path / "run1" / "cross_section.svg").read_bytes()
        svg2 = (tmp_path / "run2" / "cross_section.svg").read_bytes()
        assert svg1 == svg2
        rep = json.loads(rep1)
        assert rep["label"] == "J"
        assert rep["metrics"]["void_count"] == 1

    def test_svg_well_formed_with_one_polyline_per_curve(self, tmp_path, capsys):
        out = tmp_path / "fig"
        argv = ["analyze", "--d2", "0", "--d3", "2", "--d4", "3",
                "--r2", "0", "--r3", "0", "--grid", "128", "--out", str(out)]
        assert run(argv) == 0
        root = ET.parse(out / "cross_section.svg").getroot()
        polylines = [e for e in root.iter() if e.tag.endswith("polyline")]
        curves = trace_section_curves(DesignParams(0, 2, 3, 0, 0), 1024)
        assert len(polylines) == len(curves)

    def test_unwritable_output_exits_3(self, tmp_path, capsys):
        blocker = tmp_path / "blocked"
        blocker.write_text("not a directory")
        argv = ["analyze", "--d2", "1", "--d3", "0", "--d4", "2",
                "--r2", "0", "--r3", "1", "--grid", "128", "--out", str(blocker)]
        assert run(argv) == 3

    def test_single_node_group_report(self, tmp_path, capsys):
        out = tmp_path / "b2"
        argv = ["analyze", "--d2", "0", "--d3", "2", "--d4", "3",
                "--r2", "0", "--r3", "0", "--grid", "192", "--out", str(out)]
        assert run(argv) == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["label"] == "B2"
        assert rep["metrics"]["node_count"] == 1
        assert len(rep["nodes"]) == 1


class TestSweepCommand:
    def test_case_b_zones_split_by_diagonal(self, tmp_path, capsys):
        out = tmp_path / "sweep"
        # Cell centres avoid the d3 = d4 transition exactly.
        argv = ["sweep", "--case", "B", "--x", "d3:0.4..2.4:5", "--y",
                "d4:0.55..2.55:5", "--grid", "128", "--trace", "256",
                "--out", str(out)]
        assert run(argv) == 0
        with (out / "zone_map.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 25
        for row in rows:
            d3, d4 = float(row["d3"]), float(row["d4"])
            expected = "B1" if d4 < d3 else "B2"
            assert row["label"] == expected, (d3, d4, row)
            assert int(row["node_count"]) == (0 if d4 < d3 else 1)
        svg = (out / "zone_map.svg").read_text()
        ET.fromstring(svg)

    def test_case_a_three_zones(self, tmp_path, capsys):
        out = tmp_path / "sweep_a"
        argv = ["sweep", "--case", "A", "--x", "d3:1.4..2.2:2", "--y",
                "d4:0.8..4:4", "--fixed", "r2=1", "--grid", "128",
                "--trace", "256", "--out", str(out)]
        assert run(argv) == 0
        with (out / "zone_map.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8
        for row in rows:
            d3, d4 = float(row["d3"]), float(row["d4"])
            if d4 < d3:
                expected = "A1"
            elif d4 < math.hypot(d3, 1.0):
                expected = "A2"
            else:
                expected = "A3"
            assert row["label"] == expected, (d3, d4, row)

    def test_sweep_spec_type_validates(self):
        from ortho3r.atlas.sweep import Axis, SweepSpec, SweepSpecError
        good = SweepSpec("A", Axis("d3", 0.5, 2, 4), Axis("d4", 0.5, 2, 4),
                         {"r2": 1.0})
        assert good.design_at(1.0, 1.5).astuple() == (0.0, 1.0, 1.5, 1.0, 0.0)
        with pytest.raises(SweepSpecError):
            SweepSpec("A", Axis("d2", 0.5, 2, 4), Axis("d4", 0.5, 2, 4),
                      {"r2": 1.0})
        with pytest.raises(SweepSpecError):
            SweepSpec("A", Axis("d3", 0.5, 2, 4), Axis("d4", 0.5, 2, 4),
                      {"r2": 1.0, "r3": 1.0})
        with pytest.raises(SweepSpecError):
            SweepSpec("B", Axis("d3", 0.0, 2, 4), Axis("d4", 0.5, 2, 4))

    def test_zero_pattern_violations_exit_1(self, tmp_path, capsys):
        base = ["--grid", "128", "--out", str(tmp_path / "x")]
        assert run(["sweep", "--case", "A", "--x", "d2:0.1..2:4",
                    "--y", "d4:0.3..3:4", *base]) == 1
        assert run(["sweep", "--case", "A", "--x", "d3:0.3..3:4",
                    "--y", "d4:0.3..3:4", "--fixed", "r3=1", *base]) == 1
        assert run(["sweep", "--case", "A", "--x", "d3:0.3..3:4",
                    "--y", "d4:0.3..3:4", *base]) == 1   # r2 missing

    def test_bad_axis_spec_exit_1(self, tmp_path, capsys):
        assert run(["sweep", "--case", "B", "--x", "d3=0..1:4",
                    "--y", "d4:0.3..3:4", "--out", str(tmp_path / "y")]) == 1


class TestVerifyCommand:
    def test_case_a_rows_pass(self, capsys):
        assert run(["verify", "--only", "A", "--grid", "256"]) == 0
        out = capsys.readouterr().out
        rows = [ln for ln in out.splitlines() if ln.rstrip().endswith("pass")]
        assert len(rows) == 3
        assert "3/3 passed" in out

    def test_only_filter_counts_rows(self, capsys):
        assert run(["verify", "--only", "D", "--grid", "192"]) == 0
        out = capsys.readouterr().out
        n_d = sum(1 for _, lab, _, _ in PAPER_EXAMPLES if lab.startswith("D"))
        assert f"{n_d}/{n_d} passed" in out


class TestTableCommand:
    def test_prints_all_groups(self, capsys):
        assert run(["table"]) == 0
        out = capsys.readouterr().out
        lines = [ln for ln in out.splitlines() if ln.strip()]
        assert len(lines) == 22          # header + 21 rows
        assert any(ln.strip().startswith("A3") and "Intermediate" in ln
                   for ln in lines)

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from cauchylab import __version__
from cauchylab.cli import (
    DEFAULT_TOLERANCES,
    ExperimentConfig,
    ExperimentError,
    ExperimentReport,
    Reference,
    emit,
    main,
    render,
    run,
)
from cauchylab.domains import DomainSpec


@pytest.fixture(scope="module")
def counter_report():
    return run(ExperimentConfig("counterexample"))


@pytest.fixture(scope="module")
def schur_report():
    return run(ExperimentConfig("schur"))


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig("counterexample")
        assert cfg.domain == DomainSpec.disk() and cfg.format == "text"
        assert cfg.tol("lhs") == 1e-5

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"experiment": "nope"},
            {"experiment": "counterexample", "domain": DomainSpec.square()},
            {"experiment": "annulus-identity", "domain": DomainSpec.disk()},
            {"experiment": "schur", "format": "xml"},
            {"experiment": "schur", "tolerances": {"bogus": 1.0}},
            {"experiment": "eigentest", "levels": (-1,)},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            ExperimentConfig(**kwargs)

    def test_config_echo_has_all_tolerances(self):
        cfg = ExperimentConfig("schur", tolerances={"schur_disk": 1e-3})
        echo = cfg.to_dict()
        assert set(echo["tolerances"]) == set(DEFAULT_TOLERANCES)
        assert echo["tolerances"]["schur_disk"] == 1e-3


class TestReference:
    @pytest.mark.parametrize(
        "comparison,target,tol,value,ok",
        [
            ("abs", 1.0, 0.1, 1.05, True),
            ("abs", 1.0, 0.1, 1.2, False),
            ("rel", 100.0, 1e-3, 100.05, True),
            ("gt", 1.0, 0.0, 1.0, False),
            ("ge", 1.0, 0.0, 1.0, True),
            ("lt", 0.0, 0.0, -1e-9, True),
            ("le", 0.0, 1e-8, 5e-9, True),
            ("le", 0.0, 1e-8, 5e-8, False),
        ],
    )
    def test_check(self, comparison, target, tol, value, ok):
        assert Reference("anchor", target, tol, comparison).check(value) is ok

    def test_bad_comparison(self):
        with pytest.raises(ValueError):
            Reference("anchor", 1.0, 0.1, "approx")


class TestRun:
    def test_counterexample(self, counter_report):
        rep = counter_report
        assert rep.computed["lhs"] == pytest.approx(8 / 3, abs=1e-5)
        assert rep.verdicts["counterexample"] == "pass"
        assert rep.passed

    def test_every_reference_has_verdict(self, counter_report, schur_report):
        for rep in (counter_report, schur_report):
            assert set(rep.references) == set(rep.verdicts)

    def test_schur_disk(self, schur_report):
        assert schur_report.computed["bound"] == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.slow
    def test_square_eigentest(self):
        rep = run(ExperimentConfig("eigentest", DomainSpec.square(), (3,)))
        assert rep.computed["ratio"] > 0.45016
        assert rep.computed["margin"] > 0
        assert rep.passed

    def test_stage_attribution(self):
        # level 9 meshes are rejected inside the numerical stage
        with pytest.raises(ExperimentError, match="stage"):
            run(ExperimentConfig("eigentest", DomainSpec.disk(), (9,)))

    def test_determinism(self):
        a = render(run(ExperimentConfig("counterexample")), "json")
        b = render(run(ExperimentConfig("counterexample")), "json")
        assert a == b


class TestEmit:
    def test_json_round_trip(self, counter_report):
        text = render(counter_report, "json")
        data = json.loads(text)
        assert data["schema"] == 1 and data["version"] == __version__
        again = render(ExperimentReport.from_dict(data), "json")
        assert again == text

    def test_json_shortest_floats(self, counter_report):
        data = json.loads(render(counter_report, "json"))
        for value in data["computed"].values():
            assert repr(float(value)) == repr(value)

    def test_json_no_timing_by_default(self, counter_report):
        assert "timing" not in json.loads(render(counter_report, "json"))
        assert "timing" in json.loads(render(counter_report, "json", include_timing=True))

    def test_csv_rows(self, counter_report):
        rows = list(csv.reader(io.StringIO(render(counter_report, "csv"))))
        assert len(rows) == len(counter_report.computed) + 1
        assert rows[0] == ["name", "value", "reference", "tolerance", "verdict"]

    def test_csv_line_endings(self, counter_report):
        text = render(counter_report, "csv")
        assert "\r" not in text and text.endswith("\n")

    def test_empty_report(self, tmp_path):
        empty = ExperimentReport(config={})
        path = tmp_path / "empty.csv"
        emit(empty, "csv", str(path))
        assert path.read_text(encoding="utf-8") == "name,value,reference,tolerance,verdict\n"
        data = json.loads(render(empty, "json"))
        assert data["computed"] == {}

    def test_text_table(self, counter_report):
        lines = render(counter_report, "text").splitlines()
        assert lines[0].split() == ["name", "value", "reference", "tolerance", "verdict"]
        assert set(lines[1]) <= {"-", " "}

    def test_failing_row_is_complete(self):
        rep = ExperimentReport(
            config={},
            computed={"x": 1.5},
            references={"x": Reference("anchor", 1.0, 0.1)},
            verdicts={"x": "fail"},
        )
        row = next(r for r in csv.reader(io.StringIO(render(rep, "csv"))) if r[0] == "x")
        assert row == ["x", "1.5", "1.0", "0.1", "fail"]

    def test_unknown_schema(self):
        with pytest.raises(ValueError):
            ExperimentReport.from_dict({"schema": 99})


class TestMain:
    def test_exit_pass(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        assert main(["run", "counterexample", "--format", "json", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["verdicts"]["lhs"] == "pass"

    def test_exit_fail(self, capsys):
        # an impossible tolerance makes the verdict fail
        assert main(["run", "schur", "--tol", "schur_disk=0"]) == 2

    def test_exit_error(self, capsys):
        assert main(["run", "counterexample", "--domain", "square"]) == 1
        assert "error" in capsys.readouterr().err

    def test_bad_tolerance_syntax(self, capsys):
        assert main(["run", "schur", "--tol", "schur_disk=abc"]) == 1

    def test_annulus_flags(self, capsys):
        assert main(["run", "annulus-identity", "--domain", "annulus", "--r", "0.5", "--R", "1"]) == 0
        out = capsys.readouterr().out
        assert "energy" in out

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "cauchylab", "run", "schur", "--format", "csv"],
            capture_output=True,
            text=True,
            check=False,
        )
        assert proc.returncode == 0
        rows = list(csv.reader(io.StringIO(proc.stdout)))
        bound = next(r for r in rows if r[0] == "bound")
        assert math.isclose(float(bound[1]), 1.0, abs_tol=1e-6)

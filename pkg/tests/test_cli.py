import json

import pytest
from typer.testing import CliRunner

from svistab.cli import app
from svistab.errors import InputError
from svistab.exporters import emit_csv

from .conftest import FIXTURES

runner = CliRunner()


def test_certify_cubic_is_vacuous_and_exits_zero(tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(app, ["certify", "-s", str(FIXTURES / "cubic.json"), "-o", str(out), "-q"])
    assert result.exit_code == 0
    report = json.loads(out.read_text())
    assert report["summary"]["verdicts"] == {"vacuous": 1}
    [res] = report["results"]
    assert res["id"] == "thm-liplsc"
    assert res["result"]["reports"][0]["theorem"] == "3.1"


def test_analyze_skips_certifications(tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(
        app, ["analyze", "-s", str(FIXTURES / "cubic.json"), "-o", str(out), "--only", "phi-at-minus-one", "-q"]
    )
    assert result.exit_code == 0
    report = json.loads(out.read_text())
    [res] = report["results"]
    assert res["result"]["phi"] == pytest.approx(1.0)
    assert res["result"]["in_solution"] is False


def test_violated_bound_exits_two(tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(app, ["certify", "-s", str(FIXTURES / "broken_shift.json"), "-o", str(out), "-q"])
    assert result.exit_code == 2
    assert json.loads(out.read_text())["summary"]["verdicts"] == {"violated": 1}


def test_malformed_spec_exits_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "instances": [')
    result = runner.invoke(app, ["analyze", "-s", str(bad), "-q"])
    assert result.exit_code == 1


def test_unknown_field_exits_one(tmp_path):
    bad = tmp_path / "bad.json"
    spec = json.loads((FIXTURES / "cubic.json").read_text())
    spec["instances"][0]["colour"] = "red"
    bad.write_text(json.dumps(spec))
    result = runner.invoke(app, ["validate", "-s", str(bad)])
    assert result.exit_code == 1


def test_unknown_only_id_exits_one():
    result = runner.invoke(app, ["analyze", "-s", str(FIXTURES / "cubic.json"), "--only", "nope", "-q"])
    assert result.exit_code == 1


def test_validate():
    result = runner.invoke(app, ["validate", "-s", str(FIXTURES / "fan.json")])
    assert result.exit_code == 0
    assert "Valid:" in result.output


def test_sweep_emits_val_series_as_csv():
    result = runner.invoke(app, ["sweep", "-s", str(FIXTURES / "shift.json"), "--only", "val", "-q"])
    assert result.exit_code == 0
    lines = result.stdout.strip().splitlines()
    assert lines[0] == "p,val"
    rows = [tuple(float(c) for c in line.split(",")) for line in lines[1:]]
    assert [p for p, _ in rows] == pytest.approx([-1.0, -0.5, 0.0, 0.5, 1.0])
    for p, v in rows:
        assert v == pytest.approx(p, abs=1e-6)


def test_emit_csv_empty_series_is_header_only():
    report = {"series": {"s": {"columns": ["scale", "value"], "rows": []}}}
    assert emit_csv(report, "s") == "scale,value\n"


def test_emit_csv_formats_infinities():
    report = {"series": {"s": {"columns": ["scale", "value"], "rows": [[0.1, float("inf")], [0.01, 1 / 3]]}}}
    assert emit_csv(report, "s") == "scale,value\n0.1,+inf\n0.01,0.333333333333\n"


def test_emit_csv_unknown_series():
    with pytest.raises(InputError):
        emit_csv({"series": {}}, "missing")

import csv
import io
import json
import logging

import pytest

from bggfem.cli import EXIT_ASSEMBLY, EXIT_CERT_FAIL, EXIT_OK, EXIT_PARSE, main
from bggfem.report import REPORT_KEYS, RunConfig, certify, strip_runtime, to_json


def _certify(tmp_path, *extra):
    out = tmp_path / "report.out"
    code = main(["certify", "--oracle-trials", "2", "-o", str(out), *extra])
    return code, out.read_text() if out.exists() else ""


def test_mesh_gen_and_info(tmp_path, capsys):
    path = tmp_path / "cc.mesh"
    assert main(["mesh", "gen", "--kind", "criss-cross-square", "--res", "1", "-o", str(path)]) == EXIT_OK
    assert path.exists()
    assert main(["mesh", "info", str(path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "dim=2" in out and "V=5" in out and "F=4" in out


def test_mesh_gen_needs_output():
    assert main(["mesh", "gen", "--kind", "square"]) == EXIT_PARSE


def test_mesh_errors(tmp_path):
    bad = tmp_path / "bad.mesh"
    bad.write_text("not a mesh\n")
    assert main(["mesh", "info", str(bad)]) == EXIT_PARSE
    assert main(["mesh", "info", str(tmp_path / "missing.mesh")]) == EXIT_PARSE
    assert main(["mesh", "info", "gen:square:x"]) == EXIT_PARSE
    assert main(["mesh", "gen", "--kind", "cube-with-tunnel", "--res", "1", "-o", str(tmp_path / "t")]) == EXIT_PARSE


def test_certify_json(tmp_path):
    code, text = _certify(tmp_path, "--mesh", "gen:square-with-hole:4", "--kinds", "hessian-2d,divdiv0-2d")
    assert code == EXIT_OK
    reports = json.loads(text)
    assert [r["kind"] for r in reports] == ["hessian-2d", "divdiv0-2d"]
    for r in reports:
        assert tuple(sorted(r)) == tuple(sorted(REPORT_KEYS))
        assert r["mesh"]["counts"]["V"] == 36
    assert [row["computed"] for row in reports[0]["cohomology"]] == [3, 3, 0]


def test_certify_all_kinds_csv(tmp_path):
    code, text = _certify(tmp_path, "--mesh", "gen:two-tets:1", "--kinds", "all", "--format", "csv")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 8 * 4
    assert {r["pass"] for r in rows} == {"True"}
    assert {r["kind"] for r in rows} >= {"divdiv-trimmed-3d", "aux0-3d"}


@pytest.mark.parametrize("fault", ["flip-sign", "perturb-entry"])
def test_certify_fault_fails(tmp_path, fault):
    code, text = _certify(tmp_path, "--mesh", "gen:criss-cross-square:1", "--kinds", "hessian-2d", "--fault", fault)
    assert code == EXIT_CERT_FAIL
    (report,) = json.loads(text)
    assert not report["composites"]["pass"] or not report["oracle"]["pass"]


def test_certify_argument_errors(tmp_path):
    assert main(["certify", "--mesh", "gen:square:1", "--kinds", "hessian-3d"]) == EXIT_PARSE
    assert main(["certify", "--mesh", "gen:square:1", "--kinds", "nope"]) == EXIT_PARSE
    assert main(["certify", "--mesh", "gen:square:1", "--kinds", "all", "--seed", "-1"]) == EXIT_PARSE
    assert main(["certify", "--mesh", "gen:square:1", "--kinds", "all", "--fault", "bogus"]) == EXIT_PARSE
    assert main(["certify", "--kinds", "all"]) == EXIT_PARSE
    assert main([]) == EXIT_PARSE
    assert EXIT_ASSEMBLY == 3


def test_oracle_size_limit_is_reported(tmp_path):
    code, text = _certify(tmp_path, "--mesh", "gen:cube:1", "--kinds", "hessian-3d", "--oracle-max-cells", "2")
    assert code == EXIT_OK
    oracle = json.loads(text)[0]["oracle"]
    assert "above the oracle limit" in oracle["skipped"] and oracle["operators"] == []


def test_reports_are_deterministic():
    config = RunConfig("certify", "gen:cube:1", ["divdiv-3d", "aux-3d"], seed=5, oracle_trials=3)
    a, b = certify(config), certify(config)
    assert to_json(strip_runtime(a)) == to_json(strip_runtime(b))


def test_log_level_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("BGG_LOG", "debug")
    root = logging.getLogger()
    saved = root.handlers[:], root.level
    root.handlers = []
    try:
        assert main(["mesh", "info", "gen:square:1"]) == EXIT_OK
        assert root.level == logging.DEBUG
    finally:
        root.handlers, level = saved
        root.setLevel(level)

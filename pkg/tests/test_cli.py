import json
import subprocess
import sys
from pathlib import Path

import pytest

from algflow.cli import main

PROBLEMS = Path(__file__).resolve().parent.parent / "demos" / "problems"


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_limit_set_lists_two_semitori(capsys):
    code, out, _ = run_cli(capsys, "limit-set", PROBLEMS / "two_semitori.json")
    rep = json.loads(out)
    assert code == 0 and rep["schema_version"] == 1 and rep["kind"] == "radii"
    assert sorted(c["provenance"]["radii"] for c in rep["components"]) == [[0, 2], [1, 3]]


def test_pole_free_curve(capsys):
    code, out, _ = run_cli(capsys, "analyze-curve", PROBLEMS / "pole_free.json")
    assert code == 0 and "single limit point" in json.loads(out)["note"]


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 1,')
    code, out, err = run_cli(capsys, "limit-set", bad)
    assert code == 2 and out == "" and "malformed" in err


@pytest.mark.parametrize(
    "payload",
    [
        {"schema_version": 2},
        {"schema_version": 1, "lattice": {"n": 1, "generators": [["1"]]}},
        {"schema_version": 1, "lattice": {"n": 1, "generators": [["1"]]}, "curve": {"n": 2, "terms": []}},
    ],
)
def test_schema_errors(tmp_path, capsys, payload):
    p = tmp_path / "p.json"
    p.write_text(json.dumps(payload))
    assert run_cli(capsys, "limit-set", p)[0] == 2


def test_depth_exceeded_exit_code(capsys):
    code, _, err = run_cli(capsys, "sequences", PROBLEMS / "independent_pair.json", "--depth", "1")
    assert code == 5 and "DepthExceeded" in err


def test_reports_are_byte_identical(capsys):
    a = run_cli(capsys, "good-disc", PROBLEMS / "independent_pair.json")[1]
    b = run_cli(capsys, "good-disc", PROBLEMS / "independent_pair.json")[1]
    assert a == b and json.loads(a)["discs"][0]["pole_space_matches"]


def test_csv_mass_table(capsys):
    code, out, _ = run_cli(
        capsys, "mass-check", PROBLEMS / "compact_inverse.json", "--format", "csv", "--a-grid", "2^-3,2^-4"
    )
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "a,mass,ratio" and len(lines) == 3


def test_flags_override_file(capsys):
    code, out, _ = run_cli(
        capsys, "verify-equidist", PROBLEMS / "compact_inverse.json", "--samples", "20000", "--a-grid", "2^-5"
    )
    rep = json.loads(out)
    assert code == 0 and rep["reports"][0]["N"] == 20000


def test_cluster_scan_example(capsys):
    code, out, _ = run_cli(capsys, "cluster-scan", PROBLEMS / "semi_torus_z1.json", "--samples", "20000")
    rep = json.loads(out)
    assert code == 0 and rep["retained"] > 0 and rep["max_distance"] < 1e-2


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "algflow", "leading-powers", str(PROBLEMS / "independent_pair.json")],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0 and json.loads(res.stdout)["leading_powers"] == [[-1, 0], [0, -1]]

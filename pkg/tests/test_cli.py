import json
import math
import subprocess
import sys

import numpy as np
import pytest

from circle_patterns import cli


def run(argv, capsys):
    code = cli.run(argv)
    out = capsys.readouterr()
    return code, json.loads(out.out), out.err


@pytest.fixture(scope="module")
def pattern_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("patterns")
    paths = {}
    for name in ("hex-torus", "bolza"):
        p = d / f"{name}.json"
        assert cli.run(["example", name, "--output", str(p)]) == 0
        paths[name] = str(p)
    return paths


def test_example_hex_torus(capsys):
    code, data, err = run(["example", "hex-torus"], capsys)
    assert code == 0 and "genus 1" in err
    assert len(data["theta"]) == 3 and np.allclose(data["theta"], math.pi / 3)


@pytest.mark.parametrize("name", ["hex-torus", "bolza"])
def test_example_then_validate(pattern_files, name, capsys):
    code, data, _ = run(["validate", pattern_files[name]], capsys)
    assert code == 0 and data["valid"] and data["delaunay"]["ok"]


def test_floats_round_trip_exactly(pattern_files):
    from circle_patterns import crossratio as cr
    from circle_patterns import io

    X = io.load_pattern(pattern_files["bolza"])
    _, Y = cr.example_bolza()
    assert np.array_equal(X.log_mag, Y.log_mag) and np.array_equal(X.theta, Y.theta)


def test_malformed_json_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, data, _ = run(["validate", str(bad)], capsys)
    assert code == 3 and data["error"]["type"] == "FormatError"


def test_missing_file_exits_3(tmp_path, capsys):
    code, data, _ = run(["holonomy", str(tmp_path / "nope.json")], capsys)
    assert code == 3 and "error" in data


def test_wrong_lengths_exit_3(tmp_path, pattern_files, capsys):
    data = json.loads(open(pattern_files["hex-torus"]).read())
    data["theta"] = data["theta"][:2]
    p = tmp_path / "short.json"
    p.write_text(json.dumps(data))
    code, out, _ = run(["validate", str(p)], capsys)
    assert code == 3


def test_invalid_pattern_exits_1(tmp_path, pattern_files, capsys):
    data = json.loads(open(pattern_files["bolza"]).read())
    data["log_mag"] = [v + 0.05 for v in data["log_mag"]]
    p = tmp_path / "off.json"
    p.write_text(json.dumps(data))
    code, out, _ = run(["validate", str(p)], capsys)
    assert code == 1 and out["valid"] is False and out["error"]["type"] == "validation"


def test_solve_recovers_pattern(tmp_path, pattern_files, capsys):
    data = json.loads(open(pattern_files["bolza"]).read())
    data["log_mag"] = [v * 1.01 for v in data["log_mag"]]
    p = tmp_path / "noisy.json"
    p.write_text(json.dumps({"pattern": data}))
    code, out, _ = run(["solve", str(p), "--tol", "1e-12"], capsys)
    assert code == 0 and out["residual"] < 1e-10
    assert out["pattern"]["theta"] == data["theta"]


def test_solve_non_convergence_exits_2(tmp_path, pattern_files, capsys):
    data = json.loads(open(pattern_files["bolza"]).read())
    data["log_mag"] = [v + 0.3 for v in data["log_mag"]]
    p = tmp_path / "far.json"
    p.write_text(json.dumps(data))
    code, out, _ = run(["solve", str(p), "--max-iter", "0"], capsys)
    assert code == 2 and out["error"]["type"] == "NoConvergence"


def test_solve_bad_angles_exits_1(tmp_path, pattern_files, capsys):
    theta = tmp_path / "theta.json"
    theta.write_text(json.dumps({"theta": [1.0, 1.0, 1.0]}))
    code, out, _ = run(["solve", pattern_files["hex-torus"], "--theta", str(theta)], capsys)
    assert code == 1 and out["error"]["type"] == "InvalidAngles"


def test_tangent(pattern_files, capsys):
    code, out, _ = run(["tangent", pattern_files["bolza"], "--field", "real"], capsys)
    assert code == 0 and out["dims"] == {"real": 6, "complex": 7}
    assert len(out["basis"]) == 6


def test_holonomy(pattern_files, capsys):
    code, out, _ = run(["holonomy", pattern_files["bolza"], "--seed-face", "2"], capsys)
    assert code == 0 and len(out["generators"]) == 4 and out["root_face"] == 2
    assert out["relator_defect"] < 1e-8
    m = out["generators"][0]["matrix"]
    assert set(m) == {"re", "im"}


def test_bad_seed_face_exits_1(pattern_files, capsys):
    code, out, _ = run(["holonomy", pattern_files["bolza"], "--seed-face", "9"], capsys)
    assert code == 1


def test_forms(pattern_files, capsys):
    code, out, _ = run(["forms", pattern_files["hex-torus"], "--pairs", "basis"], capsys)
    assert code == 0 and out["complex_dim"] == 2
    G = np.array(out["goldman"]["re"]) + 1j * np.array(out["goldman"]["im"])
    H = np.array(out["half_penner"]["re"]) + 1j * np.array(out["half_penner"]["im"])
    assert np.abs(G - H).max() < 1e-10


def test_check_theorem_bolza(pattern_files, capsys):
    code, out, _ = run(["check-theorem", pattern_files["bolza"], "--tol", "1e-8"], capsys)
    assert code == 0 and out["passed"] and out["max_discrepancy"] < 1e-8


def test_rigidity(pattern_files, capsys):
    code, out, _ = run(["rigidity", pattern_files["bolza"]], capsys)
    assert code == 0 and out["rigid"] is True and out["implied_dim_real"] == 6


def test_report_with_figures(tmp_path, pattern_files, capsys):
    figs = tmp_path / "figs"
    code, out, _ = run(["report", pattern_files["bolza"], "--figures", str(figs)], capsys)
    assert code == 0 and out["theorem"]["passed"]
    assert "timestamp" not in out
    for path in out["figures"].values():
        with open(path, "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"


def test_report_is_deterministic(pattern_files, capsys):
    _, a, _ = run(["report", pattern_files["hex-torus"]], capsys)
    _, b, _ = run(["report", pattern_files["hex-torus"]], capsys)
    assert a == b


def test_module_entry_point(pattern_files):
    proc = subprocess.run([sys.executable, "-m", "circle_patterns", "validate", pattern_files["hex-torus"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["valid"]

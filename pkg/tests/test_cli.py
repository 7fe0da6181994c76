import json

import numpy as np
import pytest

from schur_interp import cli

GOLDEN_A = {"kind": "nevanlinna_pick", "points": [0.0], "values": [0.0]}
GOLDEN_B = {"kind": "nevanlinna_pick", "points": [0.0, 0.5], "values": [0.0, 0.5]}
UNSOLVABLE = {"kind": "nevanlinna_pick", "points": [0.0, 0.5], "values": [0.0, 0.99]}
SARASON = {"kind": "sarason", "zeros": [0.0, 0.5], "W_poly": [0.0, 0.3]}
FAST = ["--grid-nodes", "8", "--radii", "0.3,0.8"]


def dump(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for key in ("TOL", "GRID_NODES", "RADII", "SEED"):
        monkeypatch.delenv(cli.ENV_PREFIX + key, raising=False)


def test_decode_helpers():
    assert cli.decode_matrix(0.5, "x").shape == (1, 1)
    np.testing.assert_array_equal(cli.decode_matrix([[[1, 2], 0]], "x"), [[1 + 2j, 0]])
    np.testing.assert_array_equal(cli.decode_vector([[0, 1], 0.5], "x"), [1j, 0.5])
    with pytest.raises(cli.FormatError):
        cli.decode_matrix([[1, 2], [3]], "x")
    assert cli.digest({"b": 1, "a": 2}) == cli.digest({"a": 2, "b": 1})


def test_check_codes(tmp_path, capsys):
    code, rep = run(capsys, "check", dump(tmp_path, "a.json", GOLDEN_A))
    assert code == 0 and rep["passed"] and rep["defects"]["mu"] == rep["defects"]["nu"] == 1
    assert rep["instance"]["n"] == 1 and len(rep["instance"]["sha256"]) == 64
    code, rep = run(capsys, "check", dump(tmp_path, "b.json", GOLDEN_B))
    assert code == 0 and rep["defects"]["mu"] == 0
    code, rep = run(capsys, "check", dump(tmp_path, "u.json", UNSOLVABLE))
    assert code == 1 and not rep["solvable"] and rep["solvability"]["min_eigenvalue"] < 0
    code, rep = run(capsys, "check", dump(tmp_path, "s.json", SARASON))
    assert code == 0


@pytest.mark.parametrize("text", [
    "{not json",
    json.dumps([1, 2]),
    json.dumps({"kind": "mystery"}),
    json.dumps({"kind": "nevanlinna_pick", "points": [0.0]}),
    json.dumps({"kind": "nevanlinna_pick", "points": [0.0], "values": [[1, 2, 3]]}),
    json.dumps({"kind": "sarason", "zeros": [0.0]}),
])
def test_malformed_input(tmp_path, capsys, text):
    code, rep = run(capsys, "check", dump(tmp_path, "bad.json", text))
    assert code == 2 and not rep["passed"] and rep["error"]


def test_missing_file(tmp_path, capsys):
    code, _ = run(capsys, "check", str(tmp_path / "absent.json"))
    assert code == 2


def test_invalid_data_is_a_failure(tmp_path, capsys):
    bad = {"kind": "nevanlinna_pick", "points": [0.0, 0.0], "values": [0.0, 0.1]}
    code, rep = run(capsys, "check", dump(tmp_path, "dup.json", bad))
    assert code == 1 and "InvalidDataError" in rep["error"]
    outside = {"kind": "nevanlinna_pick", "points": [1.5], "values": [0.0]}
    code, _ = run(capsys, "check", dump(tmp_path, "out.json", outside))
    assert code == 1


def test_raw_aip(tmp_path, capsys):
    raw = {"kind": "raw_aip", "T": [[0.0]], "D": [[1.0]], "E": [[1.0]], "M": [[0.0]]}
    code, rep = run(capsys, "check", dump(tmp_path, "raw.json", raw))
    assert code == 0 and rep["fi_ok"]
    raw["D"] = [[2.0]]
    code, rep = run(capsys, "check", dump(tmp_path, "raw2.json", raw))
    assert code == 1 and not rep["fi_ok"]


def test_solve_central(tmp_path, capsys):
    code, rep = run(capsys, "solve", *FAST, dump(tmp_path, "a.json", GOLDEN_A))
    assert code == 0 and rep["passed"]
    sol = rep["solutions"][0]
    vals = np.array(sol["samples"]["values"])
    assert vals.shape == (16, 1, 1, 2) and np.abs(vals).max() < 1e-14
    assert sol["verification"]["fmi"]["passed"]


def test_solve_with_parameter(tmp_path, capsys):
    eps = dump(tmp_path, "eps.json", {"kind": "constant", "value": [[[0.6, 0.8]]]})
    for route in ("lft", "extension"):
        code, rep = run(capsys, "solve", *FAST, "--route", route, "--epsilon", eps,
                        dump(tmp_path, "a.json", GOLDEN_A))
        assert code == 0
        s = rep["solutions"][0]["samples"]
        z = np.array([complex(*p) for p in s["points"]])
        v = np.array([complex(*m[0][0]) for m in s["values"]])
        np.testing.assert_allclose(v, (0.6 + 0.8j) * z, atol=1e-12)


def test_solve_random_parameter_uses_seed(tmp_path, capsys):
    eps = dump(tmp_path, "eps.json", {"kind": "random", "state_dim": 2})
    prob = dump(tmp_path, "a.json", GOLDEN_A)
    _, r1 = run(capsys, "solve", *FAST, "--seed", "3", "--epsilon", eps, prob)
    _, r2 = run(capsys, "solve", *FAST, "--seed", "3", "--epsilon", eps, prob)
    _, r3 = run(capsys, "solve", *FAST, "--seed", "4", "--epsilon", eps, prob)
    assert r1["passed"]
    assert r1["solutions"][0]["samples"] == r2["solutions"][0]["samples"]
    assert r1["solutions"][0]["samples"] != r3["solutions"][0]["samples"]


def test_solve_wrong_parameter_shape(tmp_path, capsys):
    eps = dump(tmp_path, "eps.json", {"kind": "constant", "value": [[0.1, 0.2]]})
    code, rep = run(capsys, "solve", *FAST, "--epsilon", eps, dump(tmp_path, "a.json", GOLDEN_A))
    assert code == 1


def test_solve_skips_points_on_spectrum(tmp_path, capsys):
    code, rep = run(capsys, "solve", "--grid-nodes", "4", "--radii", "0.5",
                    dump(tmp_path, "b.json", GOLDEN_B))
    assert code == 0
    assert rep["solutions"][0]["verification"]["skipped_points"] == [[0.5, 0.0]]


def test_solve_unsolvable(tmp_path, capsys):
    code, rep = run(capsys, "solve", dump(tmp_path, "u.json", UNSOLVABLE))
    assert code == 1 and "solutions" not in rep


def test_solve_sarason(tmp_path, capsys):
    code, rep = run(capsys, "solve", *FAST, dump(tmp_path, "s.json", SARASON))
    assert code == 0 and rep["solutions"][0]["verification"]["interpolation"]["passed"]


def test_verify_candidates(tmp_path, capsys):
    a = dump(tmp_path, "a.json", GOLDEN_A)
    b = dump(tmp_path, "b.json", GOLDEN_B)
    half = dump(tmp_path, "c.json", {"kind": "constant", "value": 0.5})
    code, rep = run(capsys, "verify", "--radii", "0.3,0.9", "--grid-nodes", "8", a, half)
    assert code == 1 and not rep["passed"]
    ident = dump(tmp_path, "i.json", {"kind": "state_space", "A": [], "B": [], "C": [],
                                      "D": [[0.0]]})
    code, _ = run(capsys, "verify", *FAST, a, ident)
    assert code == 0
    shift = dump(tmp_path, "z.json", {"kind": "state_space", "A": [[0.0]], "B": [[1.0]],
                                      "C": [[1.0]], "D": [[0.0]]})
    code, rep = run(capsys, "verify", *FAST, b, shift)
    assert code == 0 and rep["candidate"]["kind"] == "state_space"


def test_verify_samples(tmp_path, capsys):
    pts = [0.0, 0.5, 0.3j, -0.4]
    cand = {"kind": "samples", "points": [[p.real, p.imag] for p in map(complex, pts)],
            "values": [[[[complex(p).real, complex(p).imag]]] for p in pts]}
    code, rep = run(capsys, "verify", dump(tmp_path, "b.json", GOLDEN_B),
                    dump(tmp_path, "s.json", cand))
    assert code == 0
    ver = rep["verification"]
    assert ver["not_run"] == ["ks_bound"] and ver["interpolation"]["residual"] < 1e-15
    cand["values"][1] = 0.2
    code, _ = run(capsys, "verify", dump(tmp_path, "b.json", GOLDEN_B),
                  dump(tmp_path, "s.json", cand))
    assert code == 1
    # samples that miss the interpolation nodes cannot be checked against them
    cand = {"kind": "samples", "points": [0.1, 0.2], "values": [0.1, 0.2]}
    code, rep = run(capsys, "verify", dump(tmp_path, "b.json", GOLDEN_B),
                    dump(tmp_path, "s.json", cand))
    assert "interpolation" in rep["verification"]["not_run"]


def test_verify_bad_candidate(tmp_path, capsys):
    a = dump(tmp_path, "a.json", GOLDEN_A)
    for cand in ("[]", {"kind": "nope"}, {"kind": "constant", "value": [[1, 2]]},
                 {"kind": "samples", "points": [2.0], "values": [0.0]}):
        code, _ = run(capsys, "verify", a, dump(tmp_path, "c.json", cand))
        assert code == 2


def test_coeffs(tmp_path, capsys):
    code, rep = run(capsys, "coeffs", "--grid-nodes", "4", "--radii", "0.5",
                    dump(tmp_path, "a.json", GOLDEN_A))
    assert code == 0 and len(rep["coefficients"]) == 4
    c = rep["coefficients"][1]
    z = complex(*c["z"])
    assert complex(*c["s11"][0][0]) == pytest.approx(1)
    assert complex(*c["s22"][0][0]) == pytest.approx(z)
    code, _ = run(capsys, "coeffs", dump(tmp_path, "u.json", UNSOLVABLE))
    assert code == 1


def test_output_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    code = cli.main(["check", "-o", str(out), dump(tmp_path, "a.json", GOLDEN_A)])
    assert code == 0 and capsys.readouterr().out == ""
    assert json.loads(out.read_text())["passed"]
    assert [p.name for p in tmp_path.iterdir() if p.name.startswith(".report-")] == []


def test_tolerance_flags(tmp_path, capsys):
    prob = dump(tmp_path, "a.json", GOLDEN_A)
    code, rep = run(capsys, "check", "--tol", "psd_tol=1e-6,fi_tol=1e-9", prob)
    assert code == 0 and rep["tolerances"]["psd_tol"] == 1e-6
    assert rep["tolerances"]["fi_tol"] == 1e-9
    code, _ = run(capsys, "check", "--tol", "bogus=1", prob)
    assert code == 2
    code, _ = run(capsys, "check", "--tol", "psd_tol", prob)
    assert code == 2


def test_environment_defaults(tmp_path, capsys, monkeypatch):
    prob = dump(tmp_path, "a.json", GOLDEN_A)
    monkeypatch.setenv("SCHUR_INTERP_GRID_NODES", "5")
    monkeypatch.setenv("SCHUR_INTERP_RADII", "0.2,0.4")
    monkeypatch.setenv("SCHUR_INTERP_SEED", "11")
    monkeypatch.setenv("SCHUR_INTERP_TOL", "psd_tol=1e-7")
    _, rep = run(capsys, "check", prob)
    assert rep["grid"] == {"nodes": 5, "radii": [0.2, 0.4]} and rep["seed"] == 11
    assert rep["tolerances"]["psd_tol"] == 1e-7
    _, rep = run(capsys, "check", "--grid-nodes", "7", "--seed", "1", prob)
    assert rep["grid"]["nodes"] == 7 and rep["seed"] == 1
    monkeypatch.setenv("SCHUR_INTERP_GRID_NODES", "many")
    code, _ = run(capsys, "check", prob)
    assert code == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["--version"])
    assert exc.value.code == 0
    assert cli.__version__ in capsys.readouterr().out

import json
import subprocess
import sys
from fractions import Fraction

import pytest

from modulidim.cli import main, run, run_batch
from modulidim.errors import ValidationError
from modulidim.exact import format_rational, parse_rational

REID_DESCRIPTOR = {
    "singularities": [{"m": 2, "w": 1}, {"m": 3, "w": 2}, {"m": 7, "w": 6}],
    "topology": {"tauB": "-7", "chiB": "15", "b1B": 0, "bplusB": 3},
    "bundle": {"dimG": 3, "p1B": "-1090/21"},
}


def call(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), (json.loads(err) if err.strip() else None)


def test_run_examples():
    assert run({"command": "cy-dim", "payload": {"orders": [2, 3, 7]}}) == {
        "negIndex": 48, "h11": "11", "warnings": []
    }
    assert run({"command": "dedekind", "payload": {"w": 1, "m": 1}})["value"] == "0/1"
    r = run({"command": "ypq-index", "payload": {"p": 2, "q": 1}})
    assert r["invariantIndex"] == "-(t^-1+1+t)" and r["dimension"] == 3


def test_orbifold_index_descriptor():
    assert run({"command": "orbifold-index", "payload": REID_DESCRIPTOR}) == {
        "index": "-48", "dimension": 48, "warnings": []
    }


def test_orbifold_index_explicit_weights_and_bookkeeping():
    payload = {
        "singularities": [{"m": 2, "w": 1, "weights": [0, 0, 0]}, {"m": 3, "w": 2, "weights": [0, 1, 2]},
                          {"m": 7, "w": 6, "weights": [0, 5, 2]}],
        "topology": {"p1BH": "-545/21", "eBH": "545/42", "b1B": 0, "bplusB": 3},
        "bundle": {"dimG": 3, "p1B": "-1090/21"},
    }
    assert run({"command": "orbifold-index", "payload": payload})["index"] == "-48"


def test_orbifold_index_route_disagreement_warns():
    payload = dict(REID_DESCRIPTOR, bundle={"dimG": 3, "p1B": "-1069/21"})
    r = run({"command": "orbifold-index", "payload": payload})
    assert r["index"] == "-47"
    assert any("disagree" in w for w in r["warnings"])


def test_orbifold_index_fractional_warns():
    payload = {"topology": {"b1B": 0, "bplusB": 1}, "bundle": {"dimG": 3, "p1B": "1/3"}}
    r = run({"command": "orbifold-index", "payload": payload})
    assert r["index"] == "10/3" and r["dimension"] is None
    assert r["warnings"][0].startswith("IntegralityWarning")


def test_other_commands():
    assert run({"command": "flatness", "payload": {"orders": [2] * 16}})["isFlat"] is True
    r = run({"command": "cy-dim", "payload": {"orders": [2] * 16}})
    assert r["negIndex"] == -6 and r["warnings"]
    r = run({"command": "ypq-quasireg", "payload": {"p": 7, "q": 3}})
    assert (r["regularity"], r["squareRoot"]) == ("QuasiRegular", 13)
    r = run({"command": "ypq-index", "payload": {"p": 7, "q": 3}})
    assert r["dimension"] == 3 and r["warnings"][0].startswith("QuasiRegularWarning")
    r = run({"command": "ypq-curvature", "payload": {"a": 0.5, "rho": 0.9}})
    assert r["eigenCheck"]["pass"] and abs(r["sT"] - 24) < 1e-6
    r = run({"command": "u1-moduli", "payload": {"duality": "ASD", "b1": 1, "latticeRank": 2, "torsionOrders": [2]}})
    assert r["componentTopology"] == "T^1" and r["componentTorsion"] == [2]


def test_generic_orbit_table():
    payload = {"orbits": [{"numerator": [["1", [0, 0]]], "factors": [{"monomial": [-1, 0], "polarization": "+"}],
                           "delta": [0, 0]}]}
    r = run({"command": "ypq-index", "payload": payload})
    assert r["invariantIndex"] == "1" and r["dimension"] == -1


def test_formula_flag():
    r = run({"command": "cy-dim", "payload": {"orders": [2, 3, 7]}}, formula=True)
    assert "90 - 2" in r["formula"]
    assert "formula" not in run({"command": "cy-dim", "payload": {"orders": []}})


@pytest.mark.parametrize(
    "job",
    [
        {"command": "nope"},
        {"payload": {}},
        {"command": "dedekind", "payload": {"w": "1", "m": 3}},
        {"command": "dedekind", "payload": {"w": 1}},
        {"command": "cy-dim", "payload": {"orders": [1]}},
        {"command": "orbifold-index", "payload": {"topology": {"tauB": 0.5}}},
        {"command": "orbifold-index", "payload": {}},
        {"command": "ypq-index", "payload": {"p": 2, "q": 2}},
    ],
)
def test_validation_errors(job):
    with pytest.raises(ValidationError):
        run(job)


def test_run_batch():
    assert run_batch([]) == []
    jobs = [{"command": "cy-dim", "payload": {"orders": [2, 3, 7]}}, {"command": "cy-dim", "payload": {"orders": []}}]
    out = run_batch(jobs, 2)
    assert [r["negIndex"] for r in out] == [48, 90]
    mixed = [jobs[0], {"command": "dedekind", "payload": {"w": 2, "m": 4}},
             {"command": "ypq-curvature", "payload": {"a": 0.5, "rho": 1.0}}]
    out = run_batch(mixed, 3)
    assert out[0]["negIndex"] == 48
    assert out[1]["error"]["type"] == "NotCoprime" and out[1]["error"]["exitCode"] == 2
    assert out[2]["error"]["type"] == "DegenerateMetric" and out[2]["error"]["exitCode"] == 3
    with pytest.raises(ValidationError):
        run_batch(jobs, 0)


def _big_batch():
    jobs = []
    for m in range(2, 30):
        jobs.append({"command": "dedekind", "payload": {"w": 1, "m": m}})
        jobs.append({"command": "ypq-index", "payload": {"p": m, "q": 1}})
    jobs.append({"command": "orbifold-index", "payload": REID_DESCRIPTOR})
    jobs.append({"command": "ypq-curvature", "payload": {"a": 0.3, "rho": 0.7}})
    jobs.append({"command": "dedekind", "payload": {"w": 2, "m": 4}})
    return jobs


def test_batch_determinism():
    jobs = _big_batch()
    dumps = {json.dumps(run_batch(jobs, n)) for n in (1, 8, 8, 3)}
    assert len(dumps) == 1


def test_rationals_roundtrip():
    for job in _big_batch():
        try:
            result = run(job)
        except Exception:
            continue
        for key in ("value", "index", "h11"):
            if key in result:
                assert format_rational(parse_rational(result[key])) == format_rational(
                    Fraction(result[key])
                )
        for coeff, _ in result.get("invariantIndexTerms", []):
            parse_rational(coeff)


def test_main_commands(capsys):
    code, out, _ = call(["dedekind", "5", "7"], capsys)
    assert code == 0 and out["value"] == "-1/14"
    code, out, _ = call(["ypq", "index", "2", "1"], capsys)
    assert out["invariantIndex"] == "-(t^-1+1+t)"
    code, out, _ = call(["ypq", "curvature", "--a", "0.5", "--rho", "0.8"], capsys)
    assert out["eigenCheck"]["pass"]
    code, out, _ = call(["cy-dim", "2", "3", "7", "--formula"], capsys)
    assert out["negIndex"] == 48 and "formula" in out
    code, out, _ = call(["--formula", "flatness", "2", "3", "7"], capsys)
    assert out["value"] == "463/42" and "formula" in out
    code, out, _ = call(["u1-moduli", "--duality", "SD", "--b1", "0", "--rank", "1"], capsys)
    assert out["componentTopology"] == "R x T^0"


def test_main_exit_codes(capsys):
    code, out, err = call(["dedekind", "2", "4"], capsys)
    assert code == 2 and out is None and err["error"]["type"] == "NotCoprime"
    code, out, err = call(["ypq-curvature", "--a", "0.5", "--rho", "1.0"], capsys)
    assert code == 3 and err["error"]["type"] == "DegenerateMetric"
    with pytest.raises(SystemExit) as exc:
        main(["dedekind", "x", "1"])
    assert exc.value.code == 2


def test_main_config_and_batch(tmp_path, capsys):
    cfg = tmp_path / "reid.json"
    cfg.write_text(json.dumps(REID_DESCRIPTOR))
    code, out, _ = call(["orbifold-index", "--config", str(cfg)], capsys)
    assert code == 0 and out == {"index": "-48", "dimension": 48, "warnings": []}
    batch = tmp_path / "batch.json"
    batch.write_text(json.dumps([{"command": "orbifold-index", "payload": REID_DESCRIPTOR},
                                 {"command": "dedekind", "payload": {"w": 2, "m": 4}}]))
    code, out, _ = call(["--batch", str(batch), "--jobs", "4"], capsys)
    assert code == 2 and out[0]["index"] == "-48" and "error" in out[1]
    code, out, err = call(["--batch", str(tmp_path / "missing.json")], capsys)
    assert code == 2 and err["error"]["type"] == "ValidationError"


def test_precision_env(monkeypatch, capsys):
    monkeypatch.setenv("MODULIDIM_PRECISION", "40")
    payload = {"singularities": [{"m": 7, "w": 6, "weights": [0, 5, 2]}],
               "topology": {"b1B": 0, "bplusB": 1}, "bundle": {"dimG": 3, "p1B": "0"}}
    with pytest.raises(ValidationError):
        run({"command": "orbifold-index", "payload": payload})
    monkeypatch.setenv("MODULIDIM_PRECISION", "160")
    assert run({"command": "orbifold-index", "payload": payload})["index"] == str(3 + Fraction(-10, 7))


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "modulidim", "cy-dim", "2", "3", "7"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["negIndex"] == 48

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

import oracles
from neumannbif.cli import BRANCH_HEADER, CLASSIFY_HEADER, DIAGRAM_HEADER, SPECTRUM_HEADER, main

RADIAL_MODEL = {"kind": "radial", "f_coefficients": [0.125, -0.25, 0.125], "r0": 1.0}


def _write(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_spectrum_disk(tmp_path, capsys):
    cfg = _write(tmp_path, {"version": 1, "dimension_N": 2, "matrix_A": [[1.0]], "lambda_range": [0.1, 1.0],
                            "cutoffs": {"beta_max": 15.0}})
    code, out, _ = _run(capsys, "spectrum", "--config", cfg)
    assert code == 0
    rows = _rows(out)
    assert rows[0] == SPECTRUM_HEADER
    got = [(float(r[0]), int(r[1]), int(r[4])) for r in rows[1:]]
    expected = sorted([(0.0, 0, 1), (oracles.roots(2, 1, 1)[0] ** 2, 1, 2),
                       (oracles.roots(2, 2, 1)[0] ** 2, 2, 2), (oracles.roots(2, 0, 1)[0] ** 2, 0, 1)])
    assert [(l, d) for _, l, d in got] == [(l, d) for _, l, d in expected]
    assert np.allclose([b for b, _, _ in got], [b for b, _, _ in expected], atol=1e-9)


def test_spectrum_ball_small_cutoff(tmp_path, capsys):
    cfg = _write(tmp_path, {"version": 1, "dimension_N": 3, "matrix_A": [[1.0]], "lambda_range": [0.1, 1.0],
                            "cutoffs": {"beta_max": 1.0}})
    code, out, _ = _run(capsys, "spectrum", "--config", cfg)
    assert code == 0
    assert _rows(out)[1:] == [["0.0", "0", "0", "0.0", "1", "1"]]


def test_classify_single_crossing_and_level_zero(tmp_path, capsys):
    out_path = tmp_path / "cls.csv"
    cfg = _write(tmp_path, {"version": 1, "dimension_N": 2, "matrix_A": [[1.0, 0.0], [0.0, -1.0]],
                            "lambda_range": [-0.5, 4.0], "output": {"path": "cls.csv"}})
    code, out, _ = _run(capsys, "classify", "--config", cfg)
    assert code == 0 and out == ""
    rows = list(csv.DictReader(out_path.open()))
    assert list(rows[0].keys()) == CLASSIFY_HEADER
    by_lam = {round(float(r["lambda0"]), 6): r for r in rows}
    zero = by_lam[0.0]
    assert (zero["c3"], zero["thm0"], zero["global_bifurcation"]) == ("false", "false", "false")
    beta2 = round(oracles.roots(2, 1, 1)[0] ** 2, 6)
    hit = by_lam[beta2]
    assert (hit["c1"], hit["global_bifurcation"], hit["symmetry_breaking"]) == ("true", "true", "yes")
    assert "C1 fired" in hit["explanation"]


def test_classify_odd_signature_at_zero(tmp_path, capsys):
    cfg = _write(tmp_path, {"version": 1, "dimension_N": 2, "matrix_A": [[2.0, 0.0], [0.0, 0.0]],
                            "lambda_range": [-0.5, 0.5], "output": {"format": "json"}})
    code, out, _ = _run(capsys, "classify", "--config", cfg)
    assert code == 0
    doc = json.loads(out)
    rec = doc[0] if isinstance(doc, list) else doc["rows"][0]
    assert rec["lambda0"] == 0.0 and rec["c3"] is True


def test_classify_empty_table(tmp_path, capsys):
    cfg = _write(tmp_path, {"version": 1, "dimension_N": 2, "matrix_A": [[1.0, 0.0], [0.0, 1.0]],
                            "lambda_range": [0.5, 3.0]})
    code, out, _ = _run(capsys, "classify", "--config", cfg)
    assert code == 0 and _rows(out) == [CLASSIFY_HEADER]


@pytest.mark.parametrize("doc,field", [
    ({"version": 1, "dimension_N": 2, "matrix_A": [[1.0]], "lambda_range": [0.1]}, "lambda_range"),
    ({"version": 1, "dimension_N": 2, "matrix_A": [[1.0]], "lambda_range": [0.1, 1.0], "colour": 1}, "colour"),
    ({"version": 1, "dimension_N": 2, "lambda_range": [0.1, 1.0]}, "matrix_A"),
    ({"version": 1, "dimension_N": 2, "matrix_A": [[1.0, 2.0], [0.0, 1.0]], "lambda_range": [0.1, 1.0]}, "matrix_A"),
    ({"version": 1, "dimension_N": 2, "matrix_A": [[1.0]], "lambda_range": [2.0, 1.0]}, "lambda_range"),
    ({"version": 2, "dimension_N": 2, "matrix_A": [[1.0]], "lambda_range": [0.1, 1.0]}, "version"),
    ({"version": 1, "dimension_N": 3, "model": RADIAL_MODEL, "lambda_range": [0.1, 1.0]}, "dimension_N"),
    ({"version": 1, "dimension_N": 2, "model": {**RADIAL_MODEL, "r0": 2.0}, "lambda_range": [0.1, 1.0]}, "model"),
])
def test_config_errors_name_the_field(tmp_path, capsys, doc, field):
    code, _, err = _run(capsys, "spectrum", "--config", _write(tmp_path, doc))
    assert code == 2
    assert err.startswith("configuration error:") and field in err


def test_unreadable_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(capsys, "spectrum", "--config", str(bad))[0] == 2
    assert _run(capsys, "spectrum", "--config", str(tmp_path / "missing.json"))[0] == 2


def test_numeric_failure_exit(tmp_path, capsys):
    cfg = _write(tmp_path, {"version": 1, "dimension_N": 2, "matrix_A": [[1.0]], "lambda_range": [0.1, 10.0],
                            "cutoffs": {"beta_max": 2.0}})
    code, _, err = _run(capsys, "classify", "--config", cfg)
    assert code == 3 and "InsufficientCutoffError" in err


def _verify(tmp_path, capsys, doc, name="branches.csv"):
    cfg = _write(tmp_path, {**doc, "output": {"path": name}})
    code, _, err = _run(capsys, "verify", "--config", cfg)
    summary = json.loads((tmp_path / (name + ".summary.json")).read_text())
    return code, _rows((tmp_path / name).read_text()), summary, err


def test_verify_negative_definite(tmp_path, capsys):
    doc = {"version": 1, "dimension_N": 2, "lambda_range": [0.0, 5.0], "cutoffs": {"l_max": 3, "m_max": 3},
           "model": {"kind": "quadratic", "A": [[-1.0, 0.0], [0.0, -2.0]],
                     "remainder": [{"coefficient": 0.1, "powers": [3, 0]}]}}
    code, rows, summary, _ = _verify(tmp_path, capsys, doc)
    assert code == 0
    assert rows[0] == BRANCH_HEADER
    assert all(r[1] == "trivial" for r in rows[1:])
    assert summary["detections"] == [] and summary["agreement"] is True


def test_verify_marks_unrepresentable_level(tmp_path, capsys):
    # the l = 2 level near 9.33 lies outside a basis with l_max = 1
    doc = {"version": 1, "dimension_N": 2, "lambda_range": [0.5, 10.0], "cutoffs": {"l_max": 1, "m_max": 2},
           "model": RADIAL_MODEL}
    code, rows, summary, _ = _verify(tmp_path, capsys, doc)
    assert code == 0
    status = {round(c["lambda0"], 4): c["status"] for c in summary["candidates"]}
    assert status[round(oracles.roots(2, 2, 1)[0] ** 2, 4)] == "unrepresentable at cutoff"
    assert status[round(oracles.roots(2, 1, 1)[0] ** 2, 4)] == "confirmed"
    assert any(r[1] == "bifurcating" for r in rows[1:])


def test_verify_disagreement_exit(tmp_path, capsys, monkeypatch):
    import neumannbif.galerkin.pipeline as pipeline

    monkeypatch.setattr(pipeline, "lambda_candidates", lambda *a, **k: [])
    doc = {"version": 1, "dimension_N": 2, "lambda_range": [0.5, 4.0], "cutoffs": {"l_max": 1, "m_max": 1},
           "model": RADIAL_MODEL}
    code, _, summary, err = _verify(tmp_path, capsys, doc)
    assert code == 4
    assert summary["agreement"] is False and "disagreements:" in err


def _branch_file(tmp_path, branches):
    path = tmp_path / "in.csv"
    lines = [",".join(BRANCH_HEADER)]
    for lam in (0.5, 1.0, 1.5):
        lines.append(f"0,trivial,{lam},0.0,0.1,1.0,0,1.7")
    for bid, lam0 in branches:
        lines.append(f"{bid},bifurcating,{lam0},0.0,0.0,1.0,0,0.0")
        lines.append(f"{bid},bifurcating,{lam0 + 0.1},1e-12,0.01,0.01,1,0.2")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.mark.parametrize("branches,series", [([], 1), ([(1, 3.39)], 2), ([(1, 9.3), (2, 3.39)], 3)])
def test_diagram_series(tmp_path, capsys, branches, series):
    src = _branch_file(tmp_path, branches)
    cfg = _write(tmp_path, {"version": 1, "dimension_N": 2, "model": RADIAL_MODEL, "lambda_range": [0.1, 10.0],
                            "output": {"branches": src.name, "svg": "plot.svg"}})
    code, out, _ = _run(capsys, "diagram", "--config", cfg)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0].keys()) == DIAGRAM_HEADER
    assert len({r["series_id"] for r in rows}) == series
    roots = [float(r["lambda0"]) for r in rows if r["kind"] == "bifurcating"]
    assert roots == sorted(roots)
    assert (tmp_path / "plot.svg").read_text().startswith("<svg")


def test_diagram_missing_input(tmp_path, capsys):
    cfg = _write(tmp_path, {"version": 1, "dimension_N": 2, "model": RADIAL_MODEL, "lambda_range": [0.1, 10.0],
                            "output": {"branches": "nothing.csv"}})
    assert _run(capsys, "diagram", "--config", cfg)[0] == 2


def test_cache_flag_writes_roots(tmp_path, capsys):
    cfg = _write(tmp_path, {"version": 1, "dimension_N": 2, "matrix_A": [[1.0]], "lambda_range": [0.1, 1.0],
                            "cutoffs": {"beta_max": 30.0}})
    cache = tmp_path / "roots.json"
    first = _run(capsys, "spectrum", "--config", cfg, "--cache", str(cache))
    assert cache.exists()
    second = _run(capsys, "spectrum", "--config", cfg, "--cache", str(cache))
    assert first[1] == second[1]


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, {"version": 1, "dimension_N": 2, "matrix_A": [[1.0]], "lambda_range": [0.1, 1.0],
                            "cutoffs": {"beta_max": 4.0}})
    proc = subprocess.run([sys.executable, "-m", "neumannbif", "spectrum", "--config", cfg],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == ",".join(SPECTRUM_HEADER)

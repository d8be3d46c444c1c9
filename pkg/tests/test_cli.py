import csv
import io
import json
import math
import subprocess
import sys

import pytest

from mvmourre.cli import main, read_config


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_thresholds_j2(capsys):
    code, out, _ = run(capsys, "thresholds", "--family", "j2", "--kappa", "4", "--n-max", "8")
    assert code == 0
    recs = [json.loads(l) for l in out.splitlines()]
    closed = [(5 ** 0.5 - 1) / 2, 3 ** -0.5, None, (1 - 2 ** -0.5) ** 0.5, 2 * math.cos(2 * math.pi / 9) - 1,
              ((5 - 5 ** 0.5) / 10) ** 0.5, None, (2 - 3 ** 0.5) ** 0.5]
    assert len(recs) == 8
    for r, c in zip(recs, closed):
        if c is not None:
            assert r["energy"] == pytest.approx(c, abs=1e-10)


def test_thresholds_f(capsys):
    code, out, _ = run(capsys, "thresholds", "--family", "f", "--kappa", "6", "--n-max", "3")
    es = [json.loads(l)["energy"] for l in out.splitlines()]
    assert code == 0 and es == pytest.approx([0.48487, 0.49802, 0.49990], abs=5e-5)


def test_odd_kappa_is_usage_error(capsys):
    code, _, err = run(capsys, "thresholds", "--family", "j2", "--kappa", "3")
    assert code == 2 and "even" in err


def test_per_n_failures_are_records(capsys):
    code, out, _ = run(capsys, "thresholds", "--family", "well-dec", "--kappa", "8", "--well", "5", "--n-max", "2")
    assert code == 2
    # F_6 lies closer to its limit than double precision can bracket
    code, out, _ = run(capsys, "thresholds", "--family", "f", "--kappa", "6", "--n-max", "6")
    recs = [json.loads(l) for l in out.splitlines()]
    assert code == 3 and len(recs) == 6
    assert all("energy" in r for r in recs[:5]) and "error" in recs[5]


def test_interpolate_rows(capsys):
    from mvmourre.data import golden
    code, out, _ = run(capsys, "interpolate", "--kappa", "4", "--n", "5", "--sigma", "1,2,3,4,5,6,7,8,9,10")
    rec = json.loads(out)
    assert code == 0
    assert rec["rho"] == pytest.approx(golden()["rho"]["4"]["5"], abs=1e-4)
    code, out, _ = run(capsys, "interpolate", "--kappa", "6", "--n", "4", "--sigma", "1,2,3,4,5,6,7,15")
    rec = json.loads(out)
    assert rec["rho"][-1] == pytest.approx(4.05e-6, abs=1e-8)
    assert rec["max_constraint_defect"] < 1e-9


def test_interpolate_search_and_certify(capsys):
    code, out, _ = run(capsys, "interpolate", "--kappa", "4", "--n", "2", "--n-E", "51", "--n-x", "801",
                       "--search", "1,2,3,4;1,2,3,7")
    assert code == 0 and json.loads(out)["sigma"] == [1, 2, 3, 7]
    code, out, _ = run(capsys, "interpolate", "--kappa", "4", "--n", "2", "--n-E", "51", "--n-x", "801",
                       "--search", "1,2,3,4;1,2,3,5")
    assert code == 4 and len(out.splitlines()) == 2
    code, out, _ = run(capsys, "interpolate", "--kappa", "4", "--n", "2", "--sigma", "1,2,3,5",
                       "--certify", "--n-E", "51", "--n-x", "801")
    assert code == 4 and "witness" in json.loads(out)
    code, _, _ = run(capsys, "interpolate", "--kappa", "4", "--n", "2", "--sigma", "1,2,3")
    assert code == 2


def test_bands_trivial_kappa8(capsys):
    code, out, _ = run(capsys, "bands", "--trivial", "--kappa", "8", "--n-E", "401", "--n-x", "1001")
    rows = list(csv.DictReader(io.StringIO(out)))
    want = [(0, 0.1464), (0.3826, 0.5), (0.7121, 0.8535), (0.9238, 1)]
    assert code == 0 and len(rows) == 4
    assert list(rows[0]) == ["kappa", "dim", "sigma", "left", "right", "min_interior_G"]
    for r, (a, b) in zip(rows, want):
        assert float(r["left"]) == pytest.approx(a, abs=1e-3)
        assert float(r["right"]) == pytest.approx(b, abs=1e-3)


def test_scan_and_require_positive(capsys):
    code, out, _ = run(capsys, "scan", "--kappa", "4", "--band", "1", "--energies", "0.63,0.66", "--n-x", "801",
                       "--require-positive")
    assert code == 0 and out.splitlines()[0] == "E,min_G,argmin_x"
    code, _, _ = run(capsys, "scan", "--kappa", "4", "--trivial", "--energies", "0.6", "--require-positive")
    assert code == 4
    code, out, _ = run(capsys, "scan", "--kappa", "4", "--band", "2", "--dim", "3", "--energies", "0.59",
                       "--n-x", "101", "--n-y", "101")
    assert out.splitlines()[0] == "E,min_G,argmin_x,argmin_y" and float(out.splitlines()[1].split(",")[1]) > 0


def test_profile_positive(capsys):
    code, out, _ = run(capsys, "profile", "--kappa", "6", "--band", "3", "--energy", "0.791", "--points", "201")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 402
    assert all(float(r["G"]) > 0 for r in rows)


def test_converge(capsys, tmp_path):
    pts = tmp_path / "pts.csv"
    code, out, _ = run(capsys, "converge", "--kappa", "4", "--N", "100", "--points-csv", str(pts))
    assert code == 0 and json.loads(out)["slope"] == pytest.approx(-1.872, abs=0.02)
    assert pts.read_text().splitlines()[0] == "log_n,log_gap"


def test_config_precedence(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nn_max = 2\nfamily = f\n")
    assert read_config(str(cfg)) == {"n_max": "2", "family": "f"}
    code, out, _ = run(capsys, "--config", str(cfg), "thresholds", "--family", "j2", "--kappa", "4")
    assert code == 0 and len(out.splitlines()) == 2
    assert json.loads(out.splitlines()[0])["family"] == "J2Decreasing"
    monkeypatch.setenv("MVMOURRE_CONFIG", str(cfg))
    code, out, _ = run(capsys, "thresholds", "--family", "j2", "--kappa", "4", "--n-max", "3")
    assert len(out.splitlines()) == 3
    code, _, _ = run(capsys, "--config", str(tmp_path / "missing.cfg"), "thresholds", "--family", "j2",
                     "--kappa", "4")
    assert code == 2


def test_out_file_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for p in (a, b):
        assert main(["--out", str(p), "thresholds", "--family", "alignment", "--kappa", "6"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 11


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mvmourre", "converge", "--kappa", "6", "--N", "30"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "slope" in r.stdout

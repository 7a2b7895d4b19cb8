import csv
import io
import json
import shutil
import subprocess

import numpy as np
import pytest

from resonance_recoil import cli
from resonance_recoil.atoms import bundled_species_path


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(lines))))
    return rows[0], np.array(rows[1:], dtype=float)


def comments(text):
    out = {}
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, payload = line[2:].partition(": ")
            out[key] = json.loads(payload)
    return out


class TestScan:
    def test_columns_and_metadata(self, capsys):
        code, out, _ = run(capsys, "scan", "--samples", "5")
        assert code == 0
        header, data = parse_csv(out)
        assert header == ["x", "R_m", "F0_N", "P_inf_kg_m_s", "D_Hz", "D_over_GammaA"]
        assert data.shape == (5, 6)
        meta = comments(out)["metadata"]
        assert meta["orientation"] == "fixed"
        assert len(meta["species_file_sha256"]) == 64
        assert meta["config"]["samples"] == 5

    def test_default_scan_peak_isotropic(self, capsys):
        _, out, _ = run(capsys, "scan", "--orientation", "isotropic")
        _, data = parse_csv(out)
        assert len(data) == 400
        nearest = int(np.argmin(np.abs(data[:, 0] - 1.28)))
        assert int(np.argmax(np.abs(data[:, 4]))) == nearest

    def test_default_scan_peak_fixed_z(self, capsys):
        # with both dipoles along z and R along x the maximum sits below 1.28
        _, out, _ = run(capsys, "scan")
        _, data = parse_csv(out)
        x_peak = data[int(np.argmax(np.abs(data[:, 4]))), 0]
        assert 1.15 < x_peak < 1.2

    def test_byte_identical(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run(capsys, "scan", "--samples", "50", "--out", str(a))[0] == 0
        assert run(capsys, "scan", "--samples", "50", "--out", str(b))[0] == 0
        assert a.read_bytes() == b.read_bytes()

    def test_round_trip_floats(self, capsys):
        _, out, _ = run(capsys, "scan", "--samples", "3", "--xmin", "1", "--xmax", "2")
        line = [l for l in out.splitlines() if not l.startswith("#")][2]
        assert line.split(",")[0] == "1.5"

    def test_json_format(self, capsys):
        code, out, _ = run(capsys, "scan", "--samples", "4", "--format", "json")
        payload = json.loads(out)
        assert payload["columns"][0] == "x"
        assert len(payload["rows"]) == 4

    def test_unknown_label(self, capsys):
        code, out, err = run(capsys, "scan", "--excited", "NOPE")
        assert code == 1
        assert out == ""
        e = json.loads(err)
        assert "NOPE" in e["message"]
        assert e["field"] == "excited"

    def test_invalid_grid(self, capsys):
        code, _, err = run(capsys, "scan", "--xmin", "5", "--xmax", "1")
        assert code == 1
        assert json.loads(err)["error"] == "ValidationError"

    def test_unwritable_output(self, tmp_path, capsys):
        code, _, err = run(capsys, "scan", "--samples", "3", "--out", str(tmp_path / "missing" / "x.csv"))
        assert code == 2
        assert "error" in json.loads(err)

    def test_missing_species_file(self, tmp_path, capsys):
        code, _, _ = run(capsys, "scan", "--species-file", str(tmp_path / "none.json"))
        assert code == 2


class TestConfig:
    def test_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"samples": 7, "xmin": 1.0, "xmax": 3.0}))
        _, out, _ = run(capsys, "scan", "--config", str(cfg), "--samples", "3")
        _, data = parse_csv(out)
        assert data[:, 0].tolist() == [1.0, 2.0, 3.0]
        assert comments(out)["metadata"]["config"]["xmin"] == 1.0

    @pytest.mark.parametrize("content", ['{"bogus": 1}', '{"samples": "many"}', "[1]", "{"])
    def test_bad_config(self, tmp_path, capsys, content):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(content)
        assert run(capsys, "scan", "--config", str(cfg))[0] == 1

    def test_dipole_axis_flag(self, capsys):
        _, out, _ = run(capsys, "budget", "--dipole-axis", "1,1,0")
        meta = json.loads(out)["metadata"]
        np.testing.assert_allclose(meta["dipole_axis_A"], np.array([1, 1, 0]) / np.sqrt(2))

    def test_bad_dipole_axis(self, capsys):
        with pytest.raises(SystemExit) as info:
            cli.main(["budget", "--dipole-axis", "1,2"])
        assert info.value.code == 2
        capsys.readouterr()


class TestBudget:
    def test_fields(self, capsys):
        code, out, _ = run(capsys, "budget", "--x", "1.28")
        b = json.loads(out)["budget"]
        assert code == 0
        for key in ("p_a", "p_b", "p_c", "p_de", "p_fg", "residual_theorem", "order_check"):
            assert key in b
        assert b["p_a"] == pytest.approx(1.0, abs=1e-10)
        assert abs(b["residual_theorem"]) < 1e-12 * abs(b["p_de"])
        assert b["order_check"] < 1e-4

    def test_far(self, capsys):
        b = json.loads(run(capsys, "budget", "--x", "1e4")[1])["budget"]
        assert abs(b["p_fg"]) < 1e-10

    def test_bad_x(self, capsys):
        assert run(capsys, "budget", "--x", "-1")[0] == 1


class TestEmission:
    def test_rows_and_summary(self, capsys):
        code, out, _ = run(capsys, "emission", "--x", "1.2", "--ntheta", "7")
        assert code == 0
        header, data = parse_csv(out)
        assert header == ["theta_rad", "dpdomega_per_sr"]
        assert data[0, 0] == 0.0 and data[-1, 0] == np.pi
        s = comments(out)["summary"]
        assert data[0, 1] - data[-1, 1] == pytest.approx(s["forward_minus_backward"], rel=1e-12)

    def test_integral_matches_budget(self, capsys):
        s = comments(run(capsys, "emission", "--x", "2.3")[1])["summary"]
        b = json.loads(run(capsys, "budget", "--x", "2.3")[1])["budget"]
        assert s["sphere_integral"] == pytest.approx(b["p_fg"], rel=1e-6)

    def test_dipoles_along_axis_zero_row(self, capsys):
        _, out, _ = run(capsys, "emission", "--dipole-axis", "1,0,0", "--ntheta", "5")
        _, data = parse_csv(out)
        assert data[0, 1] == 0.0 and data[-1, 1] == 0.0

    def test_ntheta_too_small(self, capsys):
        assert run(capsys, "emission", "--ntheta", "2")[0] == 1


class TestVerifyAndSpecies:
    def test_verify_fast(self, capsys):
        code, out, _ = run(capsys, "verify", "--fast")
        assert code == 0
        lines = out.splitlines()
        assert any(l.startswith("PASS optical theorem") for l in lines)
        assert not any(l.startswith("FAIL") for l in lines)

    def test_verify_rejects_corrupt_species(self, tmp_path, capsys):
        data = json.loads(bundled_species_path().read_text())
        data[0]["gamma_rad_s"] = -1.0
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        code, out, err = run(capsys, "verify", "--fast", "--species-file", str(path))
        assert code == 1
        assert out == ""
        assert json.loads(err)["field"] == "gamma_rad_s"

    def test_species_list(self, capsys):
        code, out, _ = run(capsys, "species", "list")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [r["label"] for r in rows] == ["K40_GS", "RB87_5P12"]

    def test_species_list_json(self, capsys):
        payload = json.loads(run(capsys, "species", "list", "--format", "json")[1])
        assert len(payload["species"]) == 2


@pytest.mark.skipif(shutil.which("resonance-recoil") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["resonance-recoil", "budget"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["budget"]["p_a"] == pytest.approx(1.0)
    bad = subprocess.run(["resonance-recoil", "scan", "--ground", "XX"], capture_output=True, text=True)
    assert bad.returncode == 1

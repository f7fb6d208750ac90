import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from su11zeros import cli
from su11zeros.errors import ConfigError
from su11zeros.tables import CORRELATION_COLUMNS, DENSITY_COLUMNS, DISTRIBUTION_COLUMNS, ZEROS_COLUMNS, read_csv


def run_cli(args, capsys):
    code = cli.main(args)
    out, err = capsys.readouterr()
    return code, out, err


class TestConfig:
    def test_defaults(self):
        cfg = cli.resolve_config(["simulate-density"], environ={})
        assert cfg["seed"] == 0 and cfg["L"] == 1 and cfg["out"] == "simulate-density.csv"

    def test_precedence(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("# settings\nL = 3\nseed = 11  # trailing comment\ntrials=5\n")
        env = {"SU11_SEED": "99"}
        cfg = cli.resolve_config(["simulate-density", "--config", str(conf), "--L", "4"], environ=env)
        assert cfg["L"] == 4 and cfg["seed"] == 11 and cfg["trials"] == 5
        cfg = cli.resolve_config(["simulate-density"], environ=env)
        assert cfg["seed"] == 99
        cfg = cli.resolve_config(["simulate-density", "--seed", "3"], environ=env)
        assert cfg["seed"] == 3

    def test_unknown_config_key(self, tmp_path):
        conf = tmp_path / "bad.conf"
        conf.write_text("colour = blue\n")
        with pytest.raises(ConfigError):
            cli.resolve_config(["simulate-density", "--config", str(conf)], environ={})

    @pytest.mark.parametrize("args", [["simulate-density", "--L", "0"], ["simulate-density", "--r-max", "1.0"],
                                      ["simulate-density", "--s-range", "12"], ["nope"],
                                      ["theory-table", "--what", "q"], ["simulate-density", "--format", "png"],
                                      ["theory-table", "--r-grid", "1:0:0.1"], ["simulate-density", "--bogus", "1"],
                                      ["theory-table", "--L-list", "1,1"]])
    def test_rejects(self, args):
        with pytest.raises(ConfigError):
            cli.resolve_config(args, environ={})

    def test_parse_grid(self):
        assert np.allclose(cli.parse_grid("0:1:0.25"), [0, 0.25, 0.5, 0.75, 1.0])
        assert np.allclose(cli.parse_grid("0.1, 0.5"), [0.1, 0.5])
        assert cli.parse_grid("0:0.99:0.01").size == 100

    def test_parse_points(self):
        assert cli.parse_points("0, 0.5+0.1j,-0.2j") == [0, 0.5 + 0.1j, -0.2j]


class TestCommands:
    def test_density_is_deterministic(self, tmp_path, capsys):
        outs = []
        for k in range(2):
            path = tmp_path / f"d{k}.csv"
            code, out, _ = run_cli(["simulate-density", "--L", "4", "--N", "60", "--trials", "20", "--seed", "7",
                                    "--out", str(path)], capsys)
            assert code == 0 and "command=simulate-density seed=7" in out and "max_rel_dev=" in out
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]
        t = read_csv(tmp_path / "d0.csv")
        assert t.columns == DENSITY_COLUMNS and len(t) == 10

    def test_worker_count_does_not_change_output(self, tmp_path, capsys):
        args = ["simulate-density", "--L", "2", "--N", "50", "--trials", "12", "--seed", "5"]
        run_cli(args + ["--out", str(tmp_path / "a.csv")], capsys)
        run_cli(args + ["--workers", "2", "--out", str(tmp_path / "b.csv")], capsys)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_env_seed(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("SU11_SEED", "21")
        code, out, _ = run_cli(["simulate-distribution", "--N", "40", "--trials", "5", "--s-grid=-2:2:1",
                                "--out", str(tmp_path / "p.csv")], capsys)
        assert code == 0 and "seed=21" in out
        t = read_csv(tmp_path / "p.csv")
        assert t.columns == DISTRIBUTION_COLUMNS and len(t) == 5

    def test_k2_table(self, tmp_path, capsys):
        path = tmp_path / "k2.csv"
        code, _, _ = run_cli(["theory-table", "--what", "k2", "--L", "1", "--r-grid", "0:0.99:0.01",
                              "--out", str(path)], capsys)
        assert code == 0
        t = read_csv(path)
        r, k2 = t.column("r"), t.column("k2")
        assert len(t) == 100
        assert np.allclose(k2, r * r * (2 - r * r), rtol=1e-12, atol=0)

    def test_three_curve_figure(self, tmp_path, capsys):
        path = tmp_path / "k2.svg"
        code, _, _ = run_cli(["theory-table", "--what", "k2", "--L-list", "1,5,50", "--format", "svg",
                              "--out", str(path)], capsys)
        assert code == 0
        root = ET.parse(path).getroot()
        assert len(root.findall(".//{http://www.w3.org/2000/svg}polyline")) == 3

    @pytest.mark.parametrize("what,col", [("p", "p"), ("P", "P"), ("rho", "rho"), ("hannay", "k2"), ("pN", "p_N")])
    def test_other_tables(self, tmp_path, capsys, what, col):
        path = tmp_path / "t.csv"
        code, _, _ = run_cli(["theory-table", "--what", what, "--L", "4", "--N", "100", "--out", str(path)], capsys)
        assert code == 0
        assert col in read_csv(path).columns

    def test_kacrice_eval(self, tmp_path, capsys):
        for method in ("permanent", "berezin"):
            path = tmp_path / f"{method}.csv"
            code, out, _ = run_cli(["kacrice-eval", "--L", "1", "--points", "0,0.5", "--method", method,
                                    "--out", str(path)], capsys)
            assert code == 0 and "k_2=" in out
            assert read_csv(path).rows[0][1] == pytest.approx(0.4375, rel=1e-12)

    def test_compare(self, tmp_path, capsys):
        a, b, rep = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "rep.csv"
        a.write_text("x,y\n1,2.0\n2,4.0\n")
        b.write_text("x,y\n1,2.0\n2,5.0\n")
        code, out, _ = run_cli(["compare", "--left", str(a), "--right", str(b), "--out", str(rep)], capsys)
        assert code == 0 and "max_abs=1" in out
        t = read_csv(rep)
        assert t.rows == [("y", 1.0, 0.2)]

    def test_correlation_and_outer(self, tmp_path, capsys):
        path = tmp_path / "c.csv"
        code, out, _ = run_cli(["simulate-correlation", "--L", "1", "--trials", "20", "--bins", "6",
                                "--out", str(path)], capsys)
        assert code == 0 and "max_z=" in out
        assert read_csv(path).columns == CORRELATION_COLUMNS
        path = tmp_path / "o.svg"
        code, _, _ = run_cli(["simulate-outer", "--L", "5", "--N", "80", "--trials", "10", "--bins", "6",
                              "--format", "svg", "--out", str(path)], capsys)
        assert code == 0
        ET.parse(path)

    def test_zeros_dump(self, tmp_path, capsys):
        csv_path, svg_path = tmp_path / "z.csv", tmp_path / "z.svg"
        base = ["simulate-density", "--L", "30", "--N", "40", "--trials", "3", "--out", str(tmp_path / "d.csv")]
        assert run_cli(base + ["--zeros-out", str(csv_path)], capsys)[0] == 0
        t = read_csv(csv_path)
        assert t.columns == ZEROS_COLUMNS and len(t) == 120
        assert np.all(t.column("residual") < 1e-10)
        assert run_cli(base + ["--zeros-out", str(svg_path)], capsys)[0] == 0
        root = ET.parse(svg_path).getroot()
        assert len(root.findall(".//{http://www.w3.org/2000/svg}circle")) == 120


class TestErrors:
    def test_config_error_exit_code(self, capsys):
        code, out, err = run_cli(["simulate-density", "--L", "-1"], capsys)
        assert code == 2 and out == ""
        msg = json.loads(err.strip())
        assert msg["error"] == "ConfigError" and "L" in msg["message"]

    def test_io_error_exit_code(self, tmp_path, capsys):
        code, _, err = run_cli(["theory-table", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
        assert code == 3 and json.loads(err)["error"] == "IoError"

    def test_module_error_exit_code(self, capsys):
        code, _, err = run_cli(["kacrice-eval", "--points", "0,1.5"], capsys)
        assert code == 1 and json.loads(err)["error"] == "DomainError"

    def test_missing_compare_inputs(self, capsys):
        assert run_cli(["compare"], capsys)[0] == 2

    def test_help(self, capsys):
        code, out, _ = run_cli(["--help"], capsys)
        assert code == 0 and "SU11_SEED" in out and "--config" in out

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "su11zeros.cli", "theory-table", "--what", "P", "--L", "4",
                               "--s-grid", "0", "--out", str(tmp_path / "P.csv")], capture_output=True, text=True)
        assert proc.returncode == 0
        assert read_csv(tmp_path / "P.csv").rows == [(0.0, 0.8)]

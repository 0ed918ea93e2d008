"""End-to-end CLI tests driven through main(argv) in-process."""

import csv
import json
import math

import numpy as np
import pytest

from ggpsim.cli import main
from ggpsim.container import read_checkpoints

BASE_DOC = {
    "params": {"n": 1, "p": "5", "mu": 1},
    "grid": {"L": "20pi", "N": 256},
    "init": {"type": "gaussian", "amplitude": 0.05, "width": 2.0},
    "solver": {"method": "strang", "dt": 0.01, "T": 0.64},
    "diagnostics": {"checkpoints": [0.08, 0.16, 0.32, 0.64]},
}


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run_doc(**over):
    doc = json.loads(json.dumps(BASE_DOC))
    for key, sub in over.items():
        if isinstance(sub, dict):
            doc[key].update(sub)
        else:
            doc[key] = sub
    return doc


class TestExponentsCommand:
    def test_json_report(self, capsys):
        assert main(["exponents", "--n", "1", "--p", "5", "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["exponents"]["s0"] == "3/10"
        assert doc["all_hard_checks"] == "pass"
        assert all(c["result"] == "pass" for c in doc["checks"] if c["hard"])

    def test_out_of_range_message(self, capsys):
        assert main(["exponents", "--n", "2", "--p", "5"]) == 1
        err = capsys.readouterr().err
        assert "p outside (2+√2, 4)" in err

    def test_allow_out_of_range(self, capsys):
        assert main(["exponents", "--n", "2", "--p", "5",
                     "--allow-out-of-range", "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["in_range"] is False
        assert doc["all_hard_checks"] == "pass"

    def test_n3_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["exponents", "--n", "3", "--p", "5"])
        assert exc.value.code == 2

    def test_unparseable_p(self, capsys):
        assert main(["exponents", "--n", "1", "--p", "five"]) == 2
        assert "rational" in capsys.readouterr().err

    def test_text_report(self, capsys):
        assert main(["exponents", "--n", "1", "--p", "5"]) == 0
        out = capsys.readouterr().out
        assert "s0" in out and "all hard checks: pass" in out


@pytest.fixture(scope="module")
def sim_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli_sim")
    cfg = write_config(tmp, BASE_DOC)
    out = tmp / "run"
    code = main(["simulate", cfg, "--out", str(out)])
    assert code == 0
    return tmp, cfg, out


class TestSimulateCommand:
    def test_run_directory_contents(self, sim_run):
        _, _, out = sim_run
        for name in ("ledger.csv", "report.json", "scattering.csv", "checkpoints.bin"):
            assert (out / name).exists(), name

    def test_ledger_csv_shape(self, sim_run):
        _, _, out = sim_run
        with open(out / "ledger.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][:4] == ["t", "mass", "energy", "hs0"]
        assert len(rows) - 1 == 65  # 0.64 / 0.01 steps + initial instant
        assert float(rows[1][0]) == 0.0

    def test_lf_line_endings(self, sim_run):
        _, _, out = sim_run
        for name in ("ledger.csv", "scattering.csv"):
            raw = (out / name).read_bytes()
            assert b"\r" not in raw

    def test_report_fields(self, sim_run):
        _, _, out = sim_run
        rep = json.loads((out / "report.json").read_text())
        assert rep["run"]["status"] == "ok"
        assert rep["run"]["mass_drift"] <= 1e-12
        assert rep["exponents"]["exponents"]["s0"] == "3/10"
        assert rep["verdict"] in ("scattering_consistent", "inconclusive",
                                  "growth_detected")
        assert rep["certificate"]["bound_satisfied"] is not None
        assert rep["config"]["grid"]["L"] == pytest.approx(20 * math.pi, rel=0)

    def test_scattering_csv_matches_report(self, sim_run):
        _, _, out = sim_run
        rep = json.loads((out / "report.json").read_text())
        with open(out / "scattering.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["t_k"]) for r in rows] == rep["scattering"]["checkpoints"]
        assert float(rows[0]["inc_Hs0"]) == 0.0
        assert [float(r["inc_Hs0"]) for r in rows[1:]] == rep["scattering"]["inc_hs0"]

    def test_container_matches_checkpoints(self, sim_run):
        _, _, out = sim_run
        _, _, fields = read_checkpoints(out / "checkpoints.bin")
        assert [t for t, _ in fields] == [0.0, 0.08, 0.16, 0.32, 0.64]

    def test_refuses_nonempty_out_dir(self, sim_run, capsys):
        _, cfg, out = sim_run
        assert main(["simulate", cfg, "--out", str(out)]) == 2
        assert "not empty" in capsys.readouterr().err

    def test_force_overwrites_deterministically(self, sim_run, tmp_path):
        _, cfg, out = sim_run
        code = main(["simulate", cfg, "--out", str(tmp_path / "b")])
        assert code == 0
        a = (out / "ledger.csv").read_bytes()
        b = (tmp_path / "b" / "ledger.csv").read_bytes()
        assert a == b

    def test_malformed_json_exit_2_no_outputs(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"params": {')
        out = tmp_path / "never"
        assert main(["simulate", str(bad), "--out", str(out)]) == 2
        assert "malformed JSON" in capsys.readouterr().err
        assert not out.exists()

    def test_out_of_range_p_exit_2(self, tmp_path, capsys):
        doc = run_doc(params={"n": 1, "p": "4", "mu": 1})
        cfg = write_config(tmp_path, doc)
        assert main(["simulate", cfg, "--out", str(tmp_path / "r")]) == 2
        assert "outside" in capsys.readouterr().err
        assert not (tmp_path / "r").exists()

    def test_plane_wave_init(self, tmp_path):
        doc = run_doc(init={"type": "plane_wave_perturbation",
                            "amplitude": 1e-3, "frequency": 0.5})
        del doc["init"]["width"]
        cfg = write_config(tmp_path, doc)
        assert main(["simulate", cfg, "--out", str(tmp_path / "pw")]) == 0
        rep = json.loads((tmp_path / "pw" / "report.json").read_text())
        assert rep["run"]["status"] == "ok"

    def test_theta_constant_orbit(self, tmp_path):
        doc = run_doc(init={"type": "theta_constant", "phase": 0.7})
        for key in ("amplitude", "width"):
            del doc["init"][key]
        cfg = write_config(tmp_path, doc)
        assert main(["simulate", cfg, "--out", str(tmp_path / "th")]) == 0
        rep = json.loads((tmp_path / "th" / "report.json").read_text())
        assert rep["run"]["energy_drift"] == 0.0
        _, _, fields = read_checkpoints(tmp_path / "th" / "checkpoints.bin")
        expect = complex(math.cos(0.7) - 1.0, math.sin(0.7))
        for _, f in fields:
            assert np.all(f.values == f.values.flat[0])
            assert abs(f.values.flat[0] - expect) <= 1e-15

    def test_picard_method(self, tmp_path):
        doc = run_doc(solver={"method": "picard", "dt": 0.01, "T": 0.64})
        cfg = write_config(tmp_path, doc)
        assert main(["simulate", cfg, "--out", str(tmp_path / "pic")]) == 0
        rep = json.loads((tmp_path / "pic" / "report.json").read_text())
        assert rep["run"]["picard"]["converged"] is True
        assert rep["run"]["picard"]["total_iterations"] <= 8


class TestProbeCommand:
    def test_stdout_json(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE_DOC)
        assert main(["probe", cfg]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["status"] == "ok"
        assert doc["certificate"]["thm13_quantity"] > 0

    def test_amplitude_linearity(self, tmp_path, capsys):
        quantities = []
        for amp in (0.1, 0.05, 0.025):
            doc = run_doc(init={"amplitude": amp})
            cfg = write_config(tmp_path, doc, name=f"a{amp}.json")
            assert main(["probe", cfg]) == 0
            out = json.loads(capsys.readouterr().out)
            quantities.append(out["certificate"]["thm13_quantity"])
        assert quantities[0] == pytest.approx(2 * quantities[1], rel=1e-12)
        assert quantities[1] == pytest.approx(2 * quantities[2], rel=1e-12)

    def test_zero_data_trivial(self, tmp_path, capsys):
        doc = run_doc(init={"amplitude": 0.0})
        cfg = write_config(tmp_path, doc)
        assert main(["probe", cfg]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["certificate"]["thm13_quantity"] == 0.0
        assert out["certificate"]["thm14_quantity"] == 0.0
        assert out["verdict"] == "scattering_consistent"
        assert out["xnorm_total"] == 0.0

    def test_out_file(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE_DOC)
        dest = tmp_path / "probe.json"
        assert main(["probe", cfg, "--out", str(dest)]) == 0
        capsys.readouterr()
        doc = json.loads(dest.read_text())
        assert doc["status"] == "ok"


class TestSweepCommand:
    def sweep_cfg(self, tmp_path, parallelism=2):
        doc = {
            "template": run_doc(),
            "axes": {"mu": [1, -1], "amplitude": [0.05, 0.025]},
            "parallelism": parallelism,
        }
        return write_config(tmp_path, doc, name="sweep.json")

    def test_rows_in_axis_order(self, tmp_path, capsys):
        cfg = self.sweep_cfg(tmp_path)
        out = tmp_path / "sweep.csv"
        assert main(["sweep", cfg, "--out", str(out)]) == 0
        capsys.readouterr()
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [(r["mu"], r["amplitude"]) for r in rows] == [
            ("1", "0.05"), ("1", "0.025"), ("-1", "0.05"), ("-1", "0.025"),
        ]

    def test_rows_duplicate_simulate_reports(self, tmp_path, capsys):
        cfg = self.sweep_cfg(tmp_path, parallelism=2)
        out = tmp_path / "sweep.csv"
        assert main(["sweep", cfg, "--out", str(out)]) == 0
        capsys.readouterr()
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        for amp, row in [(0.05, rows[0]), (0.025, rows[1])]:
            doc = run_doc(init={"amplitude": amp})
            one = write_config(tmp_path, doc, name=f"one{amp}.json")
            dest = tmp_path / f"one{amp}"
            assert main(["simulate", one, "--out", str(dest)]) == 0
            capsys.readouterr()
            rep = json.loads((dest / "report.json").read_text())
            assert float(row["xnorm_total"]) == rep["run"]["xnorm_total"]
            assert float(row["energy_drift"]) == rep["run"]["energy_drift"]
            assert row["verdict"] == (rep["verdict"] or "")

    def test_parallel_matches_serial(self, tmp_path, capsys, monkeypatch):
        cfg = self.sweep_cfg(tmp_path, parallelism=4)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["sweep", cfg, "--out", str(a)]) == 0
        monkeypatch.setenv("GGP_THREADS", "1")
        assert main(["sweep", cfg, "--out", str(b)]) == 0
        capsys.readouterr()
        assert a.read_bytes() == b.read_bytes()

    def test_bad_thread_cap(self, tmp_path, capsys, monkeypatch):
        cfg = self.sweep_cfg(tmp_path)
        monkeypatch.setenv("GGP_THREADS", "zero")
        assert main(["sweep", cfg]) == 2
        assert "GGP_THREADS" in capsys.readouterr().err

    def test_cap_exceeded_exit_2(self, tmp_path, capsys):
        doc = {
            "template": run_doc(),
            "axes": {"amplitude": [0.01, 0.02, 0.03]},
            "max_runs": 2,
        }
        cfg = write_config(tmp_path, doc, name="big.json")
        assert main(["sweep", cfg]) == 2
        assert "cap" in capsys.readouterr().err

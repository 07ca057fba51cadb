import json
import subprocess
import sys

import numpy as np
import pytest

from qentangle.cli import main, parse_state
from qentangle.errors import ArgumentError
from qentangle.states import ghz_state


def run(*argv):
    return subprocess.run([sys.executable, "-m", "qentangle.cli", *argv], capture_output=True, text=True)


def test_parse_state():
    assert np.allclose(parse_state("ghz3").amplitudes, ghz_state(3).amplitudes)
    assert np.allclose(parse_state("genghz:g=0.6").amplitudes[[0, 7]], [0.6, 0.8])
    assert parse_state("psi5:J=1,delta=2").n_qubits == 3
    assert parse_state("sup78:delta=3").n_qubits == 3
    assert parse_state("phi1:J=2,Js=2").n_qubits == 4
    assert parse_state("phi2:J=2,Js=2").n_qubits == 4
    for bad in ("nope", "genghz", "genghz:h=1", "psi5:delta=x", "ghz3:g=1"):
        with pytest.raises(ArgumentError):
            parse_state(bad)


def test_file_state(tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps([[1 / np.sqrt(2), 0], [0, 0], [0, 0], [0, 1 / np.sqrt(2)]]))
    s = parse_state(f"file:{p}")
    assert abs(s.amplitudes[3] - 1j / np.sqrt(2)) < 1e-15
    p.write_text("[1, 2")
    with pytest.raises(ArgumentError):
        parse_state(f"file:{p}")


def test_measures_stdout(capsys):
    assert main(["measures", "w3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "C12,C13,C23,IC1,IC2,IC3,Q,sum_sq_C,tangle"
    assert out[1].startswith("0.666666667,")


def test_exit_codes(tmp_path):
    assert main(["measures", "psi5:delta=x"]) == 2
    assert main(["measures", f"file:{tmp_path / 'absent.json'}"]) == 4
    assert main(["bell-opt", "ghz3", "--restarts", "0"]) == 2
    assert main(["measures", "w3", "--out", str(tmp_path / "no" / "x.csv")]) == 4
    r = run("measures")
    assert r.returncode == 2
    p = tmp_path / "bad.json"
    # unnormalizable amplitudes
    p.write_text("[[0, 0], [0, 0]]")
    assert main(["measures", f"file:{p}"]) == 2


def test_bell_opt_json(tmp_path):
    out = tmp_path / "o.json"
    assert main(["--seed", "3", "--restarts", "8", "bell-opt", "ghz3", "--format", "json", "--out", str(out)]) == 0
    d = json.loads(out.read_text())
    row = d["rows"][0]
    assert abs(row["value_f"] - 4) < 1e-6 and row["classification"] == "ThreeQubitCompatible"
    assert "C'_z" in d["columns"]


def test_sweep_fit_transition(tmp_path):
    sweep = tmp_path / "s.csv"
    assert main(["sweep", "--target", "gen_ghz", "--lo", "0", "--hi", "1", "--points", "21",
                 "--quantities", "Q,bell_mode_a", "--restarts", "8", "--out", str(sweep)]) == 0
    fit = tmp_path / "f.csv"
    assert main(["fit", "--input", str(sweep), "--violation-only", "--out", str(fit)]) == 0
    lines = fit.read_text().splitlines()
    assert lines[0] == "domain,model,scale,residual_rms,points"
    vio = lines[2].split(",")
    assert vio[0] == "violation_only" and abs(float(vio[2]) - 8) < 1e-3
    tr = tmp_path / "t.csv"
    assert main(["transition", "--target", "phi1", "--axis", "Js", "--fixed", "J=2", "--lo", "1", "--hi", "3",
                 "--restarts", "16", "--out", str(tr)]) == 0
    value = float(tr.read_text().splitlines()[1].split(",")[-1])
    assert abs(value - 2.06) < 0.05
    assert main(["transition", "--target", "psi5", "--lo", "3", "--hi", "5", "--scan-points", "3", "--restarts", "2"]) == 2


def test_figure_default_path(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["figure", "fig3", "--points", "3", "--restarts", "4"]) == 0
    assert (tmp_path / "fig3.csv").read_text().startswith("delta,Q,sum_sq_C,tangle,max_abs_F3\n")


def test_console_module_runs():
    r = run("measures", "ghz3")
    assert r.returncode == 0 and r.stdout.startswith("C12,")

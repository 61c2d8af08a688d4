import csv
import json

import numpy as np
import pytest

from softid import presets
from softid.cli import main


@pytest.fixture()
def pcc_file(tmp_path):
    path = tmp_path / "pcc2.json"
    doc = presets.pcc_description(2, order=(2, 8, 5))
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture()
def pendulum_file(tmp_path):
    path = tmp_path / "pendulum.json"
    path.write_text(json.dumps(presets.rigid_pendulum_description()))
    return path


def test_validate_ok(pcc_file, capsys):
    assert main(["validate", str(pcc_file)]) == 0
    out = capsys.readouterr().out
    assert "n = 6, 2 bodies" in out


def test_validate_missing_anchor_field(tmp_path, capsys):
    doc = presets.pcc_description(1)
    doc["links"][0]["body"]["anchors"] = {"x_j": [0, 0, 0.3]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", str(path)]) == 2
    assert "x_a" in capsys.readouterr().err


def test_validate_non_orthogonal_anchors(tmp_path, capsys):
    doc = presets.pcc_description(1)
    doc["links"][0]["body"]["anchors"] = {
        "x_j": [0, 0, 0.3], "x_a": [0.005, 0, 0.3], "x_b": [0.005, 0.002, 0.3],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", str(path)]) == 2
    assert "rigid-contact-area" in capsys.readouterr().err


def test_eval_iid_zero_state(pcc_file, tmp_path, capsys):
    state = tmp_path / "state.json"
    state.write_text(json.dumps({"q": [0.0] * 6}))
    out = tmp_path / "result.json"
    assert main(["eval", "--algorithm", "iid", "--state", str(state),
                 "-o", str(out), str(pcc_file)]) == 0
    payload = json.loads(out.read_text())
    assert np.abs(np.array(payload["force"])).max() < 1e-12
    assert "mass_matrix" not in payload


def test_eval_miid_outputs_mass(pcc_file, tmp_path):
    state = tmp_path / "state.json"
    state.write_text(json.dumps({"q": [0.1] * 6, "qd": [0.0] * 6, "qdd": [0.0] * 6}))
    out = tmp_path / "result.json"
    assert main(["eval", "--algorithm", "miid", "--state", str(state),
                 "-o", str(out), str(pcc_file)]) == 0
    payload = json.loads(out.read_text())
    M = np.array(payload["mass_matrix"])
    assert M.shape == (6, 6)
    assert np.abs(M - M.T).max() < 1e-9 * np.abs(M).max()


def test_eval_dimension_mismatch(pcc_file, tmp_path, capsys):
    state = tmp_path / "state.json"
    state.write_text(json.dumps({"q": [0.0, 0.0]}))
    assert main(["eval", "--algorithm", "iid", "--state", str(state), str(pcc_file)]) == 2


def test_verify_passes_on_pendulum(pendulum_file, capsys):
    assert main(["verify", "--trials", "4", str(pendulum_file)]) == 0
    out = capsys.readouterr().out
    assert "[PASS]" in out and "[FAIL]" not in out


def test_verify_rejects_zero_trials(pendulum_file):
    with pytest.raises(ValueError):
        main(["verify", "--trials", "0", str(pendulum_file)])


def test_verify_rejects_large_models(tmp_path, capsys):
    doc = presets.pcc_description(9)  # 27 dof > 24
    path = tmp_path / "big.json"
    path.write_text(json.dumps(doc))
    assert main(["verify", str(path)]) == 2
    assert "n <= 24" in capsys.readouterr().err


def test_simulate_writes_csv(pendulum_file, tmp_path):
    out = tmp_path / "traj.csv"
    assert main(["simulate", "--t-end", "0.05", "--dt", "1e-3",
                 "-o", str(out), str(pendulum_file)]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:2] == ["t", "q0"]
    assert len(rows) == 52  # header + 51 samples
    energies = [float(r[-3]) + float(r[-2]) for r in rows[1:]]
    assert np.ptp(energies) < 1e-6 * max(1.0, abs(energies[0]))


def test_statics_pendulum(pendulum_file, tmp_path):
    out = tmp_path / "eq.json"
    state = tmp_path / "guess.json"
    state.write_text(json.dumps({"q": [2.5]}))
    assert main(["statics", "--state", str(state), "-o", str(out), str(pendulum_file)]) == 0
    payload = json.loads(out.read_text())
    assert payload["converged"]
    assert abs(abs(payload["q_eq"][0]) - np.pi) < 1e-6


def test_benchmark_csv_shape(tmp_path):
    out = tmp_path / "bench.csv"
    assert main(["benchmark", "--sizes", "1,2", "--trials", "10",
                 "-o", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "n_bodies"
    assert len(rows) == 3
    assert float(rows[1][6]) < 1e-6  # rel_diff_mean at N=1


def test_quadrature_order_override(pcc_file, tmp_path):
    state = tmp_path / "state.json"
    state.write_text(json.dumps({"q": [0.2] * 6, "qd": [1.0] * 6, "qdd": [0.0] * 6}))
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["eval", "--algorithm", "iid", "--state", str(state),
                 "-o", str(out1), str(pcc_file)]) == 0
    assert main(["eval", "--algorithm", "iid", "--state", str(state),
                 "--quadrature-order", "3", "10", "8",
                 "-o", str(out2), str(pcc_file)]) == 0
    f1 = np.array(json.loads(out1.read_text())["force"])
    f2 = np.array(json.loads(out2.read_text())["force"])
    assert np.abs(f1 - f2).max() < 1e-4 * np.abs(f1).max()
    assert np.any(f1 != f2)


def test_missing_model_file(capsys):
    assert main(["validate", "/nonexistent/model.json"]) == 2


def test_seed_determinism(pendulum_file, capsys):
    assert main(["verify", "--trials", "4", "--seed", "7", str(pendulum_file)]) == 0
    out1 = capsys.readouterr().out
    assert main(["verify", "--trials", "4", "--seed", "7", str(pendulum_file)]) == 0
    out2 = capsys.readouterr().out
    assert out1 == out2

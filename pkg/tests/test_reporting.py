import json

import numpy as np

from sdr.core.errors import ConvergenceError, DivergenceError, InvalidParameterError
from sdr.models.schemas import ProxCheckRow, RunRecord
from sdr.services.reporting import read_records, write_csv, write_prox_check, write_records, write_summary


def test_records_survive_csv(tmp_path):
    records = [
        RunRecord(iteration=0, wall_seconds=0.0, objective_y=1.0, objective_ergodic=1.0, dist_ergodic=0.1),
        RunRecord(iteration=100, wall_seconds=0.25, objective_y=0.1 + 0.2, objective_ergodic=0.7, dist_ergodic=0.5),
    ]
    path = write_records(tmp_path / "nested" / "series.csv", records)
    lines = path.read_text(encoding="utf-8").split("\n")
    assert lines[0] == "iteration,wall_seconds,objective_y,objective_ergodic,dist_ergodic"
    assert lines[2].startswith("100,0.25,0.30000000000000004,")
    back = read_records(path)
    assert back[0] == records[0]
    assert back[1].objective_y == records[1].objective_y


def test_write_csv_plain_rows(tmp_path):
    path = write_csv(tmp_path / "t.csv", ["a", "b"], [[1, 2.5], ["x", True]])
    assert path.read_text(encoding="utf-8") == "a,b\n1,2.5\nx,True\n"


def test_write_csv_formats_numpy_scalars_like_python(tmp_path):
    path = write_csv(tmp_path / "n.csv", ["a", "b", "c"], [[np.float64(0.5), np.int64(3), np.float32(0.25)]])
    assert path.read_text(encoding="utf-8") == "a,b,c\n0.5,3,0.25\n"


def test_prox_check_table(tmp_path):
    row = ProxCheckRow(family="hinge_affine", check="nonexpansive", trials=3, max_error=-0.5, tolerance=1e-10, passed=True)
    text = write_prox_check(tmp_path / "p.csv", [row]).read_text(encoding="utf-8")
    assert text.splitlines()[1] == "hinge_affine,nonexpansive,3,-0.5,1e-10,True"


def test_summary_accepts_models_and_dicts(tmp_path):
    record = RunRecord(iteration=1, wall_seconds=0.0, objective_y=0.0, objective_ergodic=0.0, dist_ergodic=0.0)
    assert json.loads(write_summary(tmp_path / "m.json", record).read_text())["iteration"] == 1
    assert json.loads(write_summary(tmp_path / "d.json", {"k": 1.5}).read_text()) == {"k": 1.5}


def test_structured_errors_carry_context():
    error = ConvergenceError("Dykstra splitting reached max_iter", iterations=10, residual=0.5)
    assert error.exit_code == 4
    assert error.to_dict() == {
        "error": "ConvergenceError",
        "detail": "Dykstra splitting reached max_iter",
        "iterations": 10,
        "residual": 0.5,
    }
    assert "iterations=10" in str(error)
    assert DivergenceError("boom", iteration=3).exit_code == 5
    assert str(InvalidParameterError("plain")) == "plain"

import json
import subprocess
import sys

import numpy as np
import pytest

from skq import __version__, cli
from skq.config import Experiment
from skq.qkick import LN2

CONFIGS = {
    "spectrum": {"experiment": "QuasienergySpectrum", "map": "CyclicCat", "grid": 16, "seed": 1},
    "field": {"experiment": "QuasienergyField", "map": "Standard", "K": 0.97, "grid": 8, "N_average": 200, "seed": 1},
    "skmode": {"experiment": "SKModeField", "map": "ArnoldCat", "grid": 8, "N_average": 100, "seed": 1},
    "dynamics": {"experiment": "EnsembleDynamics", "map": "ArnoldCat", "N_ensemble": 5000, "steps": 30, "grid": 8, "seed": 7},
    "phase": {"experiment": "PhaseDecomposition", "map": "ArnoldCat", "theta0": [0, 0], "steps": 6, "N_average": 50, "seed": 0},
    "correlation": {"experiment": "CorrelationScan", "map": "ArnoldCat", "steps": 4, "samples": 2000, "seed": 0},
}


def write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj), encoding="utf-8")
    return path


def run(tmp_path, name, out="out", extra=()):
    cfg = write(tmp_path, CONFIGS[name], f"{name}.json")
    code = cli.main(["run", str(cfg), "--output-dir", str(tmp_path / out), *extra])
    assert code == 0
    return tmp_path / out


def read_csv(path):
    lines = path.read_text().splitlines()
    return lines[0], lines[1], [line.split(",") for line in lines[2:]]


def test_list_experiments(capsys):
    assert cli.main(["list-experiments"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split(":")[0] for line in out] == [e.value for e in Experiment]


def test_validate(tmp_path, capsys):
    assert cli.main(["validate", str(write(tmp_path, CONFIGS["dynamics"]))]) == 0
    assert capsys.readouterr().out.startswith("ok: EnsembleDynamics on ArnoldCat")


def test_typed_exit_codes(tmp_path, capsys):
    bad = write(tmp_path, {"experiment": "QuasienergyField", "map": "Standard", "seed": 1})
    assert cli.main(["validate", str(bad)]) == 21
    assert "ValidationError (field K)" in capsys.readouterr().err
    broken = tmp_path / "broken.json"
    broken.write_text('{"experiment":\n,}')
    assert cli.main(["run", str(broken)]) == 20
    assert "ParseError (line 2)" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.json")]) == cli.IO_EXIT
    # a non-cyclic anchor surfaces as NotCyclic
    cfg = dict(CONFIGS["skmode"], anchor=[1.0, 1.0])
    assert cli.main(["run", str(write(tmp_path, cfg, "nc.json")), "--output-dir", str(tmp_path / "nc")]) == 12


def test_spectrum_outputs(tmp_path):
    out = run(tmp_path, "spectrum")
    for label in ("up", "down"):
        comment, header, rows = read_csv(out / f"spectrum_{label}.csv")
        assert comment.startswith(f"# skq {__version__} config-sha256=")
        assert header == "i,j,theta1,theta2,value,valid"
        assert len(rows) == 16 * 16
        assert rows[1][:2] == ["0", "1"]
        assert all(r[5] == "1" for r in rows)


def test_field_outputs_and_mask(tmp_path, capsys):
    out = run(tmp_path, "field")
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3 and all(": " in line for line in lines)
    pgm = (out / "mask.pgm").read_text().splitlines()
    assert pgm[0] == "P2" and pgm[1].startswith("# skq") and pgm[2] == "8 8" and pgm[3] == "255"
    px = np.array([[int(v) for v in row.split()] for row in pgm[4:]])
    assert px.shape == (8, 8) and set(np.unique(px)) <= {0, 255}
    _, _, rows = read_csv(out / "field.csv")
    for r in rows:
        assert (r[4] == "nan") == (r[5] == "0")


def test_dynamics_outputs(tmp_path):
    out = run(tmp_path, "dynamics")
    _, header, rows = read_csv(out / "timeseries.csv")
    assert header == "n,population_up,coherence,entropy_nats,rho_re_00,rho_re_01,rho_im_01,rho_re_11"
    assert len(rows) == 31 and rows[0][0] == "0"
    assert float(rows[-1][3]) > 0.95 * LN2
    assert (out / "final_field.pgm").exists()


def test_phase_at_fixed_point_has_zero_geometric_column(tmp_path):
    out = run(tmp_path, "phase")
    _, header, rows = read_csv(out / "phase.csv")
    assert header == "n,dynamical_re,dynamical_im,geometric_re,geometric_im"
    assert len(rows) == 6
    assert all(float(r[3]) == 0 and float(r[4]) == 0 for r in rows)


def test_correlation_outputs(tmp_path):
    out = run(tmp_path, "correlation")
    _, header, rows = read_csv(out / "correlation.csv")
    assert header == "t,estimate_re,estimate_im,stderr"
    assert [r[0] for r in rows] == ["0", "1", "2", "3", "4"]
    assert float(rows[0][1]) == pytest.approx(1.0)


@pytest.mark.parametrize("name", sorted(CONFIGS))
def test_reruns_are_byte_identical(tmp_path, name):
    a = run(tmp_path, name, "a")
    b = run(tmp_path, name, "b", extra=("--threads", "3"))
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir()) and files
    for f in files:
        data = (a / f).read_bytes()
        assert data == (b / f).read_bytes()
        assert b"\r\n" not in data
        assert b"config-sha256=" in data.splitlines()[0] + data.splitlines()[1]


def test_output_dir_from_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = dict(CONFIGS["correlation"], output_dir="from_cfg")
    assert cli.main(["run", str(write(tmp_path, cfg))]) == 0
    assert (tmp_path / "from_cfg" / "correlation.csv").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "skq.cli", "list-experiments"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and "CorrelationScan" in proc.stdout
    proc = subprocess.run(
        [sys.executable, "-m", "skq.cli", "validate", str(tmp_path / "nope.json")], capture_output=True, text=True
    )
    assert proc.returncode == cli.IO_EXIT

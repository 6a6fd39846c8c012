import csv
import math
import subprocess
import sys

import numpy as np
import pytest

from schattenlearn import cli, formats
from schattenlearn.complexity import theorem_bounds
from schattenlearn.errors import ConfigError, InvalidInputError
from schattenlearn.operators import LinearOperator, SchattenBall, schatten_norm


def read_rows(path):
    with open(path) as fh:
        return [r for r in csv.reader(fh) if r and not r[0].startswith("#")]


def test_operator_round_trip(tmp_path, rng):
    M = rng.standard_normal((4, 6))
    formats.write_operator(M, tmp_path / "m.svnop")
    back = formats.read_operator(tmp_path / "m.svnop")
    assert back.shape == (4, 6)
    np.testing.assert_allclose(back.matrix, M, atol=1e-14)
    head = (tmp_path / "m.svnop").read_text().splitlines()[0]
    assert head == "SVNOP 1 4 6 4"


def test_operator_file_drops_zero_directions(tmp_path):
    formats.write_operator(np.diag([2.0, 0, 0]), tmp_path / "d.svnop")
    assert (tmp_path / "d.svnop").read_text().splitlines()[0] == "SVNOP 1 3 3 1"
    np.testing.assert_allclose(formats.read_operator(tmp_path / "d.svnop").matrix,
                               np.diag([2.0, 0, 0]))


def test_operator_file_errors(tmp_path):
    (tmp_path / "bad").write_text("SVNOP 2 1 1 1\n1\n1\n1\n")
    with pytest.raises(InvalidInputError):
        formats.read_operator(tmp_path / "bad")
    (tmp_path / "short").write_text("SVNOP 1 2 2 1\n1 0\n1\n")
    with pytest.raises(InvalidInputError):
        formats.read_operator(tmp_path / "short")


def test_dataset_round_trip_is_exact(tmp_path, rng):
    xs, ys = rng.standard_normal((7, 3)), rng.standard_normal((7, 2))
    formats.write_dataset(xs, ys, tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "# SVNDATA 1 7 3 2"
    assert len(lines[1].split(",")) == 5
    xb, yb = formats.read_dataset(tmp_path / "d.csv")
    assert np.array_equal(xb, xs) and np.array_equal(yb, ys)


def test_dataset_row_count_checked(tmp_path):
    (tmp_path / "d.csv").write_text("# SVNDATA 1 2 1 1\n1,2\n")
    with pytest.raises(InvalidInputError):
        formats.read_dataset(tmp_path / "d.csv")


def test_config_parsing(tmp_path):
    (tmp_path / "c.cfg").write_text("# comment\nd_x = 4  # trailing\n\nalpha=1.5\n")
    assert formats.read_config(tmp_path / "c.cfg") == {"d_x": "4", "alpha": "1.5"}
    (tmp_path / "dup.cfg").write_text("a = 1\na = 2\n")
    with pytest.raises(ConfigError):
        formats.read_config(tmp_path / "dup.cfg")


def test_int_lists():
    assert formats.parse_int_list("16..1024*2") == [16, 32, 64, 128, 256, 512, 1024]
    assert formats.parse_int_list("1..3, 10") == [1, 2, 3, 10]
    with pytest.raises(ConfigError):
        formats.parse_int_list("a,b")


def test_fmt_round_trips():
    for v in (0.1, 1 / 3, 1e-300, -2.5e17, math.pi):
        assert float(formats.fmt(v)) == v
    assert formats.fmt(True) == "true"
    assert formats.fmt(math.inf) == "inf"


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_gen_then_fit(tmp_path):
    assert run("gen", "-n", 40, "--seed", 3, "--out", tmp_path,
               "--set", "d_x=3", "--set", "d_y=2", "--set", "noise_sigma=0.05") == 0
    xs, ys = formats.read_dataset(tmp_path / "data.csv")
    assert xs.shape == (40, 3) and ys.shape == (40, 2)
    assert formats.read_operator(tmp_path / "truth.svnop").shape == (2, 3)
    assert run("fit", "--data", tmp_path / "data.csv", "--p", 1, "--B", 0.5,
               "--out", tmp_path) == 0
    op = formats.read_operator(tmp_path / "operator.svnop")
    assert schatten_norm(op, 1) <= 0.5 * (1 + 1e-9)
    rows = read_rows(tmp_path / "fit_report.csv")
    assert rows[0] == ["iterations", "final_risk", "converged", "active_constraint",
                       "schatten_norm"]
    assert rows[1][2] == "true"


def test_fit_nonconvergence_exit_code(tmp_path, rng):
    formats.write_dataset(rng.standard_normal((30, 5)), rng.standard_normal((30, 5)),
                          tmp_path / "d.csv")
    assert run("fit", "--data", tmp_path / "d.csv", "--p", 1, "--B", 1, "--max-iter", 2,
               "--out", tmp_path) == 3


def test_project_vector(tmp_path, capsys):
    assert run("project", "--vector", "3,1", "--p", 1, "--radius", 2, "--out", tmp_path) == 0
    assert capsys.readouterr().out.strip() == "2,0"
    assert (tmp_path / "projected.csv").read_text().strip() == "2,0"


def test_project_operator(tmp_path):
    formats.write_operator(np.diag([3.0, 4.0]), tmp_path / "t.svnop")
    assert run("project", "--operator", tmp_path / "t.svnop", "--p", "inf", "--radius", 2,
               "--out", tmp_path) == 0
    np.testing.assert_allclose(formats.read_operator(tmp_path / "projected.svnop").matrix,
                               np.diag([2.0, 2.0]), atol=1e-14)


def test_invalid_config_exit_codes(tmp_path):
    assert run("gen", "-n", 5, "--set", "d_z=3", "--out", tmp_path) == 2
    assert run("gen", "-n", 5, "--set", "alpha=abc", "--out", tmp_path) == 2
    assert run("risk-curve", "--set", "p=2", "--out", tmp_path) == 2
    assert run("project", "--vector", "1,2", "--p", 0.5, "--radius", 1, "--out", tmp_path) == 2
    assert run("fit", "--data", tmp_path / "missing.csv", "--p", 2, "--B", 1,
               "--out", tmp_path) == 2


def test_risk_curve_from_config_file(tmp_path):
    cfg = tmp_path / "rc.cfg"
    cfg.write_text("d_x = 4\nd_y = 4\nnoise_sigma = 0.1\np = 2\nB = 1\n"
                   "N_grid = 8..128*2\nseeds = 0..3\ntest_size = 1280\n")
    assert run("risk-curve", "--config", cfg, "--seed", 1, "--out", tmp_path) == 0
    rows = read_rows(tmp_path / "risk_curve.csv")
    assert rows[0] == list(("p", "B", "N", "seed", "train_risk", "test_risk", "oracle_risk",
                            "excess", "bound", "converged"))
    assert len(rows) == 1 + 5 * 4
    slope = read_rows(tmp_path / "risk_curve_slope.csv")
    assert slope[0] == ["p", "slope", "r2", "dropped_N"]


def test_rademacher_output(tmp_path):
    assert run("rademacher", "--design", "orthonormal", "--q", "1,2", "--N-grid", "4..64*2",
               "--trials", 2, "--out", tmp_path) == 0
    text = (tmp_path / "rademacher.csv").read_text()
    rows = read_rows(tmp_path / "rademacher.csv")
    assert rows[0][-1] == "violated"
    assert len(rows) == 1 + 2 * 5
    assert text.count("# fit design=orthonormal") == 2
    for r in rows[1:]:
        assert r[-1] == "false"


def test_plot_bounds(tmp_path):
    assert run("plot-bounds", "--B", 1, "--C-x", 1, "--C-y", 1, "--out", tmp_path) == 0
    rows = read_rows(tmp_path / "bounds.csv")
    assert rows[0] == ["p", "N", "bound"]
    for p, N, b in rows[1:]:
        assert float(b) == theorem_bounds(int(N), SchattenBall(float(p), 1), 1, 1, 1e-3)[1]
    assert (tmp_path / "bounds.svg").exists()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "schattenlearn", "project", "--vector", "3,4",
                          "--p", "inf", "--radius", "2", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.strip() == "2,2"

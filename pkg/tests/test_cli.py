"""End-to-end command tests: artifacts, exit codes, determinism."""

import numpy as np
import pytest

from ifslab.cli import main
from ifslab.serialize import read_attractor, read_matrix, read_vector


def write(path, text):
    path.write_text(text)
    return str(path)


@pytest.fixture
def cantor_cfg(tmp_path):
    s = write(tmp_path / "s.csv", "0.33333333333333331\n")
    t = write(tmp_path / "t.csv", "0.33333333333333331\n")
    w = write(tmp_path / "w.csv", "0.66666666666666663\n")
    return write(
        tmp_path / "cantor.cfg",
        f"s_matrix={s}\nt_matrix={t}\nw_vector={w}\ntarget_r=1e-3\n",
    )


def test_attractor_command(tmp_path, cantor_cfg, capsys):
    out = tmp_path / "out"
    assert main(["attractor", "--config", cantor_cfg, "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert printed.startswith("radius=")
    approx = read_attractor(out / "attractor.csv", out / "attractor.meta")
    assert approx.radius <= 1e-3
    assert approx.cloud.size > 0


def test_attractor_single_map(tmp_path, capsys):
    s = write(tmp_path / "s.csv", "0.5\n")
    off = write(tmp_path / "off.csv", "0.5\n")
    cfg = write(tmp_path / "one.cfg", f"s_matrix={s}\ns_offset={off}\ntarget_r=1e-3\n")
    out = tmp_path / "out"
    assert main(["attractor", "--config", cfg, "--out", str(out)]) == 0
    approx = read_attractor(out / "attractor.csv", out / "attractor.meta")
    assert np.min(np.abs(approx.cloud.points - 1.0)) <= approx.radius


def test_attractor_infeasible_target_exits_3(tmp_path, cantor_cfg, capsys):
    code = main(["attractor", "--config", cantor_cfg, "--out", str(tmp_path / "o"),
                 "rho=1e-3"])
    assert code == 3


def test_classify_cantor(tmp_path, cantor_cfg, capsys):
    out = tmp_path / "out"
    assert main(["classify", "--config", cantor_cfg, "--out", str(out)]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("DISCONNECTED gap=")
    assert (out / "verdict.txt").read_text().strip() == line


def test_classify_interval_undecided(tmp_path, capsys):
    s = write(tmp_path / "s.csv", "0.5\n")
    w = write(tmp_path / "w.csv", "0.5\n")
    cfg = write(tmp_path / "i.cfg", f"s_matrix={s}\nt_matrix={s}\nw_vector={w}\ntarget_r=1e-3\n")
    assert main(["classify", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out.startswith("UNDECIDED mingap=")


def test_classify_with_witness_flag(tmp_path, capsys):
    s = write(tmp_path / "s.csv", "0.6,0,0\n0,0.3,0\n0,0,-0.5\n")
    h = write(tmp_path / "h.csv", "1,1,1\n")
    cfg = write(
        tmp_path / "w.cfg",
        f"s_matrix={s}\ntarget_r=1e-3\n"
        f"witness.construction=low\nwitness.eps=0.75\nwitness.vector={h}\n",
    )
    assert main(["classify", "--witness", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert capsys.readouterr().out.strip() == "CONNECTED witness=image-coincidence"


def test_witness_command_writes_artifacts(tmp_path, capsys):
    u = write(tmp_path / "u.csv", "0.9,0,0\n0,0.5,0\n0,0,-0.5\n")
    h = write(tmp_path / "h.csv", "1,1,1\n")
    cfg = write(
        tmp_path / "w.cfg",
        f"u_matrix={u}\nwitness.construction=low\nwitness.eps=0.5\nwitness.vector={h}\n",
    )
    out = tmp_path / "out"
    assert main(["witness", "--config", cfg, "--out", str(out)]) == 0
    assert np.allclose(read_matrix(out / "witness_t.csv"), np.diag([0.1, 0.5, 0.0]), atol=0)
    assert np.allclose(read_vector(out / "witness_w.csv"), [0.9, 0.5, 0.0], atol=0)
    assert np.allclose(read_vector(out / "witness_e.csv"), [1.0, 1.0, 0.0], atol=1e-12)
    report = (out / "witness_report.txt").read_text()
    assert "identity residual" in report


def test_witness_empty_selection_exits_4(tmp_path, capsys):
    u = write(tmp_path / "u.csv", "-0.5,0\n0,-0.6\n")
    h = write(tmp_path / "h.csv", "1,1\n")
    cfg = write(
        tmp_path / "w.cfg",
        f"u_matrix={u}\nwitness.construction=low\nwitness.eps=0.9\nwitness.vector={h}\n",
    )
    assert main(["witness", "--config", cfg, "--out", str(tmp_path / "o")]) == 4


def test_witness_batch_mode(tmp_path, capsys):
    cfg = write(
        tmp_path / "b.cfg",
        "batch=8\ndim=4\nwitness.construction=high\nwitness.eps=0.3\n",
    )
    out = tmp_path / "out"
    assert main(["witness", "--config", cfg, "--out", str(out), "--seed", "7"]) == 0
    table = (out / "witness_batch.csv").read_text().splitlines()
    assert table[0].startswith("index,")
    assert len(table) == 9


def test_sweep_single_cell(tmp_path, capsys):
    s = write(tmp_path / "s.csv", "0.33333333333333331\n")
    cfg = write(
        tmp_path / "s.cfg",
        f"s_matrix={s}\nt_matrix={s}\ntarget_r=1e-3\nn_max=2\n"
        "grid.axis1=1\ngrid.min1=0.66666666666666663\ngrid.max1=0.66666666666666663\n"
        "grid.steps1=1\n",
    )
    out = tmp_path / "out"
    assert main(["sweep", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert len(rows) == 2
    assert "DISCONNECTED" in rows[1]
    assert (out / "sweep.png").exists()
    assert not (out / "sweep.pgm").exists()


def test_sweep_2d_deterministic_across_threads(tmp_path):
    s = write(tmp_path / "s.csv", "0.5,0,0\n0,0,0\n0,0,0\n")
    t = write(tmp_path / "t.csv", "0,-0.5,0\n0.5,0,0\n0,0,0.5\n")
    cfg = write(
        tmp_path / "s.cfg",
        f"s_matrix={s}\nt_matrix={t}\ntarget_r=5e-3\nn_max=4\n"
        "grid.axis1=1,0,0\ngrid.min1=-1\ngrid.max1=1\ngrid.steps1=4\n"
        "grid.axis2=0,0,1\ngrid.min2=-1\ngrid.max2=1\ngrid.steps2=4\n",
    )
    out1, out8 = tmp_path / "o1", tmp_path / "o8"
    assert main(["sweep", "--config", cfg, "--out", str(out1), "--threads", "1"]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(out8), "--threads", "8"]) == 0
    for name in ("sweep.csv", "sweep.pgm", "sweep.meta", "sweep.png"):
        assert (out1 / name).read_bytes() == (out8 / name).read_bytes(), name


def test_operator_report(tmp_path, capsys):
    m = write(tmp_path / "m.csv", "0.9,0,0\n0,0.5,0\n0,0,-0.5\n")
    cfg = write(tmp_path / "r.cfg", f"matrix={m}\neps=0.5\n")
    out = tmp_path / "out"
    assert main(["operator-report", "--config", cfg, "--out", str(out)]) == 0
    report = (out / "operator_report.txt").read_text()
    assert "operator norm: 0.9" in report
    spectrum_line = [l for l in report.splitlines() if l.startswith("defect spectrum:")][0]
    values = [float(f) for f in spectrum_line.split(":")[1].split(",")]
    assert np.allclose(values, [0.01, 0.25, 2.25], atol=1e-15)
    assert "low rank=2" in report
    assert "high rank=1" in report
    assert (out / "spectrum.png").exists()


def test_operator_report_rejects_nonsquare(tmp_path, capsys):
    m = write(tmp_path / "m.csv", "0.9,0\n")
    cfg = write(tmp_path / "r.cfg", f"matrix={m}\n")
    assert main(["operator-report", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_unknown_config_key_exits_2(tmp_path, cantor_cfg, capsys):
    assert main(["attractor", "--config", cantor_cfg, "--out", str(tmp_path / "o"),
                 "typo_key=1"]) == 2


def test_missing_config_file_exits_2(tmp_path, capsys):
    assert main(["classify", "--config", str(tmp_path / "none.cfg"),
                 "--out", str(tmp_path / "o")]) == 2


def test_overrides_take_precedence(tmp_path, cantor_cfg, capsys):
    out = tmp_path / "out"
    assert main(["attractor", "--config", cantor_cfg, "--out", str(out),
                 "target_r=1e-2"]) == 0
    approx = read_attractor(out / "attractor.csv", out / "attractor.meta")
    assert 1e-3 < approx.radius <= 1e-2

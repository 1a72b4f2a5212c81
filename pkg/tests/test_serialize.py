"""File formats: round-trips, strict readers, PGM rasters."""

import numpy as np
import pytest

from ifslab.geometry import cloud
from ifslab.ifs import AttractorApprox
from ifslab.serialize import (
    fmt,
    read_attractor,
    read_cloud,
    read_matrix,
    read_vector,
    sweep_csv_lines,
    write_attractor,
    write_cloud,
    write_matrix,
    write_sweep_pgm,
    write_vector,
)
from ifslab.sw_family import GridSpec, sweep


def test_fmt_round_trips_doubles():
    rng = np.random.default_rng(0)
    for x in rng.uniform(-1e6, 1e6, size=200):
        assert float(fmt(float(x))) == float(x)
    assert float(fmt(1 / 3)) == 1 / 3


def test_cloud_round_trip(tmp_path):
    c = cloud([[1 / 3, 2 / 7], [-1.5, 3.25]])
    path = tmp_path / "c.csv"
    write_cloud(path, c)
    back = read_cloud(path)
    assert np.array_equal(back.points, c.points)


def test_cloud_reader_rejects_ragged(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\n3\n")
    with pytest.raises(ValueError, match="ragged"):
        read_cloud(path)


def test_cloud_reader_rejects_empty_and_nonfinite(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("\n")
    with pytest.raises(ValueError):
        read_cloud(path)
    path.write_text("1,nan\n")
    with pytest.raises(ValueError):
        read_cloud(path)


def test_matrix_and_vector_round_trip(tmp_path):
    m = np.array([[0.5, -0.25], [1 / 3, 0.0]])
    write_matrix(tmp_path / "m.csv", m)
    assert np.array_equal(read_matrix(tmp_path / "m.csv"), m)
    v = np.array([1 / 7, -2.0, 0.0])
    write_vector(tmp_path / "v.csv", v)
    assert np.array_equal(read_vector(tmp_path / "v.csv"), v)


def test_vector_reader_rejects_matrix(tmp_path):
    path = tmp_path / "m.csv"
    path.write_text("1,2\n3,4\n")
    with pytest.raises(ValueError):
        read_vector(path)


def test_attractor_sidecar_round_trip(tmp_path):
    approx = AttractorApprox(cloud=cloud([[0.0], [1.0]]), radius=1 / 3, iterations=7)
    write_attractor(tmp_path / "a.csv", tmp_path / "a.meta", approx)
    assert (tmp_path / "a.meta").read_text().startswith("# radius=")
    back = read_attractor(tmp_path / "a.csv", tmp_path / "a.meta")
    assert back.radius == approx.radius
    assert back.iterations == 7
    assert np.array_equal(back.cloud.points, approx.cloud.points)


def small_report():
    grid = GridSpec(
        base=np.zeros(1), axes=(np.ones(1),), ranges=((0.5, 1.0),), steps=(3,)
    )
    return sweep(np.array([[1 / 3]]), np.array([[1 / 3]]), grid, target_r=1e-2, n_max=2)


def test_sweep_csv_shape():
    report = small_report()
    lines = sweep_csv_lines(report)
    assert lines[0].split(",")[:2] == ["i", "t1"]
    assert len(lines) == 4
    assert all(line.split(",")[3] == "DISCONNECTED" for line in lines[1:])


def test_sweep_pgm_rejects_1d_and_encodes_2d(tmp_path):
    report = small_report()
    with pytest.raises(ValueError):
        write_sweep_pgm(tmp_path / "r.pgm", report)
    grid2 = GridSpec(
        base=np.zeros(1), axes=(np.ones(1), np.ones(1)),
        ranges=((0.5, 1.0), (0.0, 0.2)), steps=(2, 2),
    )
    report2 = sweep(np.array([[1 / 3]]), np.array([[1 / 3]]), grid2, target_r=1e-2, n_max=2)
    write_sweep_pgm(tmp_path / "r.pgm", report2)
    text = (tmp_path / "r.pgm").read_text().splitlines()
    assert text[0] == "P2"
    assert text[2] == "2 2"
    assert text[3] == "255"
    assert all(v in {"0", "128", "255", "64"} for row in text[4:] for v in row.split())

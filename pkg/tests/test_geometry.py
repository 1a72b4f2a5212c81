"""Point-cloud metric kernels: hand oracles, metric axioms, decimation."""

import numpy as np
import pytest

from ifslab.errors import PreconditionError
from ifslab.geometry import (
    PointCloud,
    cloud,
    decimate,
    directed_distance,
    hausdorff_distance,
    min_distance,
)


def brute_directed(a, b):
    """Independent O(n*m) oracle for the directed distance."""
    worst = 0.0
    for p in a:
        best = min(float(np.linalg.norm(p - q)) for q in b)
        worst = max(worst, best)
    return worst


def brute_hausdorff(a, b):
    return max(brute_directed(a, b), brute_directed(b, a))


def random_cloud(rng, d, max_points=200):
    n = int(rng.integers(1, max_points + 1))
    return cloud(rng.uniform(-5.0, 5.0, size=(n, d)))


def test_directed_distance_single_pair():
    a = cloud([[0.0, 0.0]])
    b = cloud([[3.0, 4.0]])
    assert directed_distance(a, b) == 5.0


def test_directed_distance_is_asymmetric():
    a = cloud([[0.0], [1.0]])
    b = cloud([[0.0]])
    assert directed_distance(a, b) == 1.0
    assert directed_distance(b, a) == 0.0


def test_directed_distance_matches_pairwise_minima():
    a_pts = np.array([[0.0], [0.5], [1.0]])
    b_pts = np.array([[0.25], [0.75]])
    expected = brute_directed(a_pts, b_pts)
    assert expected == 0.25
    assert directed_distance(cloud(a_pts), cloud(b_pts)) == expected


def test_hausdorff_identity_of_indiscernibles():
    rng = np.random.default_rng(7)
    a = random_cloud(rng, 3)
    assert hausdorff_distance(a, a) == 0.0


def test_hausdorff_simple_max():
    a = cloud([[0.0], [1.0]])
    b = cloud([[0.0]])
    assert hausdorff_distance(a, b) == 1.0


def test_hausdorff_metric_axioms_randomized():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        d = int(rng.integers(1, 6))
        a = random_cloud(rng, d, 60)
        b = random_cloud(rng, d, 60)
        c = random_cloud(rng, d, 60)
        hab = hausdorff_distance(a, b)
        hba = hausdorff_distance(b, a)
        assert hab == hba
        assert hausdorff_distance(a, a) == 0.0
        assert hab <= hausdorff_distance(a, c) + hausdorff_distance(c, b) + 1e-12


def test_directed_bounded_by_hausdorff_and_min_by_directed():
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = int(rng.integers(1, 5))
        a = random_cloud(rng, d, 40)
        b = random_cloud(rng, d, 40)
        assert directed_distance(a, b) <= hausdorff_distance(a, b)
        assert min_distance(a, b) <= directed_distance(a, b)


def test_min_distance_shared_point():
    assert min_distance(cloud([[0.0]]), cloud([[0.0], [1.0]])) == 0.0


def test_min_distance_sampled_intervals():
    step = 1.0 / 27.0
    a = cloud(np.arange(0, 10)[:, None] * step)          # [0, 1/3]
    b = cloud((np.arange(18, 28)[:, None]) * step)       # [2/3, 1]
    assert min_distance(a, b) == pytest.approx(1.0 / 3.0, abs=1e-12)


def test_min_distance_hand_pair():
    a = cloud([[0.0, 0.0]])
    b = cloud([[0.0, 2.0], [1.0, 0.5]])
    # pairwise distances are {2, sqrt(1.25)}
    assert min_distance(a, b) == pytest.approx(0.5 * np.sqrt(5.0), abs=1e-15)


def test_accelerated_path_agrees_with_brute_force():
    # sizes past the dense-matrix threshold take the tree path
    rng = np.random.default_rng(11)
    a_pts = rng.uniform(-1, 1, size=(1500, 3))
    b_pts = rng.uniform(-1, 1, size=(1400, 3))
    assert a_pts.shape[0] * b_pts.shape[0] > 2_000_000
    a, b = cloud(a_pts), cloud(b_pts)
    # chunked dense oracle
    expected = 0.0
    for chunk in np.array_split(a_pts, 10):
        diff = chunk[:, None, :] - b_pts[None, :, :]
        expected = max(expected, float(np.sqrt((diff**2).sum(-1)).min(axis=1).max()))
    assert abs(directed_distance(a, b) - expected) <= 1e-12
    small = cloud(a_pts[:50])
    dense = brute_directed(small.points, b_pts[:40])
    assert abs(directed_distance(small, cloud(b_pts[:40])) - dense) <= 1e-12


def test_dimension_mismatch_rejected():
    with pytest.raises(PreconditionError):
        hausdorff_distance(cloud([[0.0]]), cloud([[0.0, 1.0]]))
    with pytest.raises(PreconditionError):
        min_distance(cloud([[0.0]]), cloud([[0.0, 1.0]]))


def test_cloud_validation():
    with pytest.raises(ValueError):
        PointCloud(np.empty((0, 2)))
    with pytest.raises(ValueError):
        cloud([[np.nan, 0.0]])


def test_decimate_noop_below_min_gap():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    out = decimate(cloud(pts), 0.25)
    assert out.points.tobytes() == np.array(sorted(map(tuple, pts))).tobytes()


def test_decimate_merges_close_points():
    a = cloud([[0.0], [0.001], [1.0]])
    out = decimate(a, 0.01)
    assert out.size == 2
    assert hausdorff_distance(a, out) <= 0.01


def test_decimate_deterministic_under_shuffle():
    rng = np.random.default_rng(5)
    pts = rng.uniform(-2, 2, size=(300, 2))
    base = decimate(cloud(pts), 0.3)
    shuffled = decimate(cloud(pts[rng.permutation(300)]), 0.3)
    assert base.points.tobytes() == shuffled.points.tobytes()


def test_decimate_contract_randomized():
    rng = np.random.default_rng(17)
    for _ in range(50):
        d = int(rng.integers(1, 4))
        a = random_cloud(rng, d, 120)
        rho = float(rng.uniform(0.01, 1.0))
        out = decimate(a, rho)
        assert hausdorff_distance(a, out) <= rho
        # representatives are original points
        as_set = {tuple(p) for p in a.points}
        assert all(tuple(p) in as_set for p in out.points)


def test_decimate_requires_positive_resolution():
    with pytest.raises(PreconditionError):
        decimate(cloud([[0.0]]), 0.0)

"""Finite point clouds in R^d and the Hausdorff-Pompeiu metric.

Clouds are the computable stand-in for compact sets: every set-level
statement elsewhere in the package is tracked through explicit Hausdorff
error bounds on clouds. Distances are Euclidean throughout.

The O(|A|*|B|) kernels are the reference implementation; large inputs are
routed through a k-d tree, which returns the same exact nearest-neighbor
distances (agreement is covered by tests). All functions are pure and the
outputs depend only on the input values, never on evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import PreconditionError

# Pair-count threshold above which nearest-neighbor queries go through the
# k-d tree instead of the dense distance matrix.
_BRUTE_PAIR_LIMIT = 2_000_000


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Nonempty finite set of points, one row per point."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ValueError(f"expected a nonempty (n, d) array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("cloud coordinates must be finite")
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]


def cloud(points) -> PointCloud:
    """Build a PointCloud from anything array-like (n points, d coords)."""
    return PointCloud(np.asarray(points, dtype=float))


def _check_same_dim(a: PointCloud, b: PointCloud):
    if a.dim != b.dim:
        raise PreconditionError(f"dimension mismatch: {a.dim} vs {b.dim}")


def _nearest_distances(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Distance from each row of src to its nearest row of dst."""
    if src.shape[0] * dst.shape[0] <= _BRUTE_PAIR_LIMIT:
        diff = src[:, None, :] - dst[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min(axis=1)
    dists, _ = cKDTree(dst).query(src, k=1)
    return np.asarray(dists, dtype=float)


def directed_distance(a: PointCloud, b: PointCloud) -> float:
    """sup over a in A of the distance from a to B (not symmetric)."""
    _check_same_dim(a, b)
    return float(np.max(_nearest_distances(a.points, b.points)))


def hausdorff_distance(a: PointCloud, b: PointCloud) -> float:
    """max of the two directed distances; a metric on point clouds."""
    _check_same_dim(a, b)
    return max(directed_distance(a, b), directed_distance(b, a))


def min_distance(a: PointCloud, b: PointCloud) -> float:
    """Smallest pairwise Euclidean distance between the two clouds."""
    _check_same_dim(a, b)
    if a.size * b.size <= _BRUTE_PAIR_LIMIT:
        diff = a.points[:, None, :] - b.points[None, :, :]
        return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min())
    dists, _ = cKDTree(b.points).query(a.points, k=1)
    return float(np.min(dists))


def decimate(a: PointCloud, rho: float) -> PointCloud:
    """Thin a cloud to one representative per grid cell, within rho.

    The grid is axis-aligned, anchored at the origin, with cell diagonal
    equal to rho, and the representative of each occupied cell is its
    lexicographically smallest member. Hence the output is a subset of the
    input with hausdorff_distance(a, decimate(a, rho)) <= rho, and it
    depends only on the set of points and rho: shuffled input, repeated
    points, or any parallel schedule produce byte-identical results.
    """
    if rho <= 0.0:
        raise PreconditionError(f"resolution must be positive, got {rho}")
    pts = a.points
    cell = rho / np.sqrt(a.dim)
    index = np.floor(pts / cell)
    if np.any(np.abs(index) >= 2.0**62):
        raise PreconditionError("resolution too fine for the coordinate range")
    order = np.lexsort(pts.T[::-1])
    pts_sorted = pts[order]
    idx_sorted = index[order].astype(np.int64)
    _, first = np.unique(idx_sorted, axis=0, return_index=True)
    reps = pts_sorted[np.sort(first)]
    return PointCloud(reps)

"""Affine contractions, the associated set function, and certified
attractor approximation.

An attractor run iterates C_{k+1} = decimate(union of map images of C_k)
from the first map's fixed point and returns the cloud together with a
radius r such that the true attractor is within Hausdorff distance r:
the geometric tail lambda^k * h(C_0, F(C_0)) / (1 - lambda) plus the
accumulated decimation error rho * (1 - lambda^k) / (1 - lambda). The
iteration count is the smallest k that brings this bound at or below the
requested target, so the certificate is sound by construction rather than
by convergence heuristics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .geometry import PointCloud, cloud, decimate, hausdorff_distance
from .operators import as_operator, certified_norm_bound

# Residual gate for fixed-point solves.
FIXED_POINT_TOL = 1e-10
DEFAULT_ITERATION_BUDGET = 10_000


@dataclass(frozen=True, eq=False)
class AffineContraction:
    """x -> matrix @ x + offset with a certified Lipschitz factor lip < 1.

    lip is the computed operator norm of the matrix inflated by the
    eigensolver tolerance, so it is a true upper bound on the contraction
    ratio.
    """

    matrix: np.ndarray
    offset: np.ndarray
    lip: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Image of an (n, d) array of points."""
        return points @ self.matrix.T + self.offset


def contraction(matrix, offset=None) -> AffineContraction:
    """Build an AffineContraction, certifying its Lipschitz factor."""
    m = as_operator(matrix)
    d = m.shape[0]
    b = np.zeros(d) if offset is None else np.asarray(offset, dtype=float).reshape(-1)
    if b.shape != (d,):
        raise ValueError(f"offset shape {b.shape} does not match dimension {d}")
    if not np.all(np.isfinite(b)):
        raise ValueError("offset must be finite")
    lip = certified_norm_bound(m)
    if lip >= 1.0:
        raise PreconditionError(f"map is not a contraction (certified factor {lip})")
    m = m.copy()
    b = b.copy()
    m.flags.writeable = False
    b.flags.writeable = False
    return AffineContraction(matrix=m, offset=b, lip=lip)


@dataclass(frozen=True, eq=False)
class IfsSystem:
    """Finite family of affine contractions on a common R^d."""

    maps: tuple[AffineContraction, ...]

    def __post_init__(self):
        if len(self.maps) == 0:
            raise ValueError("a system needs at least one map")
        dims = {f.dim for f in self.maps}
        if len(dims) != 1:
            raise ValueError(f"maps disagree on dimension: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def lam(self) -> float:
        """Contraction factor of the set function: max of the member factors."""
        return max(f.lip for f in self.maps)


@dataclass(frozen=True, eq=False)
class AttractorApprox:
    """Cloud plus a certified radius: h(cloud, attractor) <= radius."""

    cloud: PointCloud
    radius: float
    iterations: int


def apply_map(f: AffineContraction, c: PointCloud) -> PointCloud:
    """Pointwise image of a cloud under one map (no deduplication)."""
    if f.dim != c.dim:
        raise PreconditionError(f"dimension mismatch: map {f.dim}, cloud {c.dim}")
    return PointCloud(f.apply(c.points))


def hutchinson(sys: IfsSystem, c: PointCloud) -> PointCloud:
    """Union of all map images of the cloud, deduplicated and sorted."""
    if sys.dim != c.dim:
        raise PreconditionError(f"dimension mismatch: system {sys.dim}, cloud {c.dim}")
    stacked = np.vstack([f.apply(c.points) for f in sys.maps])
    return PointCloud(np.unique(stacked, axis=0))


def fixed_point(f: AffineContraction) -> np.ndarray:
    """Unique fixed point, from the linear system (I - matrix) x = offset."""
    eye = np.eye(f.dim)
    x = np.linalg.solve(eye - f.matrix, f.offset)
    residual = float(np.linalg.norm(f.matrix @ x + f.offset - x))
    if residual > FIXED_POINT_TOL:
        raise PreconditionError(f"fixed-point solve residual {residual} exceeds {FIXED_POINT_TOL}")
    return x


def bounding_radius(sys: IfsSystem) -> float:
    """Radius R with B(0, R) invariant under the system, so the attractor
    lies inside it: max over maps of ||offset|| / (1 - lambda)."""
    biggest = max(float(np.linalg.norm(f.offset)) for f in sys.maps)
    return biggest / (1.0 - sys.lam)


def _certificate_schedule(lam: float, delta0: float, rho: float, target_r: float,
                          budget: int) -> tuple[int, float]:
    """Smallest k whose certified radius is <= target_r, plus that radius."""
    tail = delta0 / (1.0 - lam)
    decim = 0.0
    k = 0
    while tail + decim > target_r:
        k += 1
        decim = rho * (1.0 - lam**k) / (1.0 - lam)
        tail = lam**k * delta0 / (1.0 - lam)
        if k > budget:
            raise PreconditionError(
                f"iteration budget {budget} exceeded before reaching target {target_r}"
            )
    return k, tail + decim


def attractor(sys: IfsSystem, target_r: float, rho: float | None = None,
              budget: int = DEFAULT_ITERATION_BUDGET) -> AttractorApprox:
    """Certified attractor approximation by decimated fixed-point iteration.

    rho is the decimation resolution; None picks rho = target_r*(1-lam)/2,
    which splits the error budget evenly between the iteration tail and the
    decimation floor. The precondition target_r > rho / (1 - lam) keeps the
    target reachable at all.
    """
    if target_r <= 0.0:
        raise PreconditionError(f"target radius must be positive, got {target_r}")
    lam = sys.lam
    if rho is None:
        rho = target_r * (1.0 - lam) / 2.0
    if rho <= 0.0:
        raise PreconditionError(f"resolution must be positive, got {rho}")
    if target_r <= rho / (1.0 - lam):
        raise PreconditionError(
            f"infeasible target: target_r {target_r} <= decimation floor {rho / (1.0 - lam)}"
        )
    seed = cloud([fixed_point(sys.maps[0])])
    delta0 = hausdorff_distance(seed, hutchinson(sys, seed))
    k, radius = _certificate_schedule(lam, delta0, rho, target_r, budget)
    current = seed
    for _ in range(k):
        current = decimate(hutchinson(sys, current), rho)
    return AttractorApprox(cloud=current, radius=radius, iterations=k)

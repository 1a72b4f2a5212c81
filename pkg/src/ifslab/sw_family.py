"""The two-map family (S x, T x + w): builders, exact connectivity
witnesses, exceptional subspaces, and classification sweeps over w.

Two witness constructions certify connected attractors for systems built
around a contraction U:

* image coincidence: with T the low-defect contraction of U and
  w = U P h, the fixed point e = (I - T)^{-1} w of the second map equals
  P h and satisfies U e = w, so both map images contain w.
* annihilation: with T the high-defect contraction of U and
  w = (I - T) Ptilde u, the identity T U e + w = 0 holds for
  e = (I - T)^{-1} w, so both map images contain the origin.

The exceptional subspaces collect, for each n, the translations w that a
rank-deficient S cannot be excluded for: X_n is the image under
(T - I)(T^n - I)^{-1} of range(S) + T^n range(S). Translations far from
every X_n up to the truncation depth force disconnected attractors, which
the sweep cross-validates against the geometric classifier.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .connectivity import IntersectionWitness, MembershipChain, Verdict, classify
from .errors import PreconditionError
from .ifs import IfsSystem, attractor, contraction
from .operators import (
    CertifiedContraction,
    as_operator,
    certified_norm_bound,
    defect_operator,
    high_defect_contraction,
    low_defect_contraction,
    require_nontrivial,
    selected_eigenvectors,
    symmetric_eigen,
)

IDENTITY_TOL = 1e-10
RANGE_THRESHOLD = 1e-10

IMAGE_COINCIDENCE_TAG = "image-coincidence"
ANNIHILATION_TAG = "annihilation"


@dataclass(frozen=True, eq=False)
class SwConfig:
    """Parameters of the two-map family: contractions S, T and shift w."""

    s: np.ndarray
    t: np.ndarray
    w: np.ndarray


def sw_config(s, t, w) -> SwConfig:
    """Validate norms and dimensions and freeze a family configuration."""
    s = as_operator(s)
    t = as_operator(t)
    w = np.asarray(w, dtype=float).reshape(-1)
    if not (s.shape[0] == t.shape[0] == w.shape[0]):
        raise ValueError(
            f"dimension mismatch: S {s.shape[0]}, T {t.shape[0]}, w {w.shape[0]}"
        )
    if not np.all(np.isfinite(w)):
        raise ValueError("shift vector must be finite")
    for name, mat in (("S", s), ("T", t)):
        if certified_norm_bound(mat) >= 1.0:
            raise PreconditionError(f"operator norm of {name} must be < 1")
    return SwConfig(s=s.copy(), t=t.copy(), w=w.copy())


def build_ifs(cfg: SwConfig) -> IfsSystem:
    """Two-map system (S x, T x + w)."""
    return IfsSystem(maps=(contraction(cfg.s), contraction(cfg.t, cfg.w)))


@dataclass(frozen=True, eq=False)
class WitnessBundle:
    """Output of a witness construction for a base contraction U.

    Holds the built second map (t, w), the distinguished member e (the
    fixed point of the second map), the certified contraction record, the
    algebraic residual of the defining identity, and the witness chains
    that attach_witness verifies.
    """

    u: np.ndarray
    t: np.ndarray
    w: np.ndarray
    e: np.ndarray
    certificate: CertifiedContraction
    residual: float
    tag: str

    def system(self) -> IfsSystem:
        """The witnessed system (U x, T x + w)."""
        return IfsSystem(maps=(contraction(self.u), contraction(self.t, self.w)))

    def intersection_witness(self) -> IntersectionWitness:
        if self.tag == IMAGE_COINCIDENCE_TAG:
            # first_map(e) == second_map(0), both sides equal w
            return IntersectionWitness(
                left=MembershipChain(anchor_map=1),
                right=MembershipChain(anchor_map=0),
                tag=self.tag,
            )
        # first_map(0) == second_map(first_map(e)), both sides equal 0
        return IntersectionWitness(
            left=MembershipChain(anchor_map=0),
            right=MembershipChain(anchor_map=1, image_maps=(0,)),
            tag=self.tag,
        )


def connectivity_witness(u, eps: float, h) -> WitnessBundle:
    """Image-coincidence witness: T low-defect, w = U P h, e = P h.

    Requires a nontrivial low-defect projection. The returned residual is
    max(||U e - w||, ||e - P h||) and must be below IDENTITY_TOL.
    """
    u = as_operator(u)
    h = np.asarray(h, dtype=float).reshape(-1)
    if h.shape[0] != u.shape[0]:
        raise ValueError(f"vector length {h.shape[0]} does not match dimension {u.shape[0]}")
    cert = require_nontrivial(low_defect_contraction(u, eps), "image-coincidence witness")
    spec = symmetric_eigen(defect_operator(u))
    p_cols = selected_eigenvectors(spec, (-np.inf, 1.0 - eps))
    ph = p_cols @ (p_cols.T @ h)
    w = u @ ph
    eye = np.eye(u.shape[0])
    e = np.linalg.solve(eye - cert.matrix, w)
    residual = max(
        float(np.linalg.norm(u @ e - w)),
        float(np.linalg.norm(e - ph)),
    )
    if residual > IDENTITY_TOL:
        raise PreconditionError(f"witness identity residual {residual} exceeds {IDENTITY_TOL}")
    return WitnessBundle(
        u=u, t=cert.matrix, w=w, e=e, certificate=cert,
        residual=residual, tag=IMAGE_COINCIDENCE_TAG,
    )


def annihilation_witness(u, eps: float, u_vec) -> WitnessBundle:
    """Annihilation witness: T high-defect, w = (I - T) Ptilde u_vec.

    The defining identity T U e + w = 0 (with e = (I - T)^{-1} w) places
    the origin in both map images. Requires a nontrivial high-defect
    projection; the residual ||T U e + w|| must be below IDENTITY_TOL.
    """
    u = as_operator(u)
    vec = np.asarray(u_vec, dtype=float).reshape(-1)
    if vec.shape[0] != u.shape[0]:
        raise ValueError(f"vector length {vec.shape[0]} does not match dimension {u.shape[0]}")
    cert = require_nontrivial(high_defect_contraction(u, eps), "annihilation witness")
    spec = symmetric_eigen(defect_operator(u))
    p_cols = selected_eigenvectors(spec, (1.0 + eps, np.inf))
    pvec = p_cols @ (p_cols.T @ vec)
    eye = np.eye(u.shape[0])
    w = (eye - cert.matrix) @ pvec
    e = np.linalg.solve(eye - cert.matrix, w)
    residual = float(np.linalg.norm(cert.matrix @ (u @ e) + w))
    if residual > IDENTITY_TOL:
        raise PreconditionError(f"witness identity residual {residual} exceeds {IDENTITY_TOL}")
    return WitnessBundle(
        u=u, t=cert.matrix, w=w, e=e, certificate=cert,
        residual=residual, tag=ANNIHILATION_TAG,
    )


@dataclass(frozen=True, eq=False)
class ExceptionalSubspace:
    """Orthonormal basis of the n-th exceptional subspace."""

    n: int
    basis: np.ndarray  # (d, dim) orthonormal columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def distance(self, w) -> float:
        """Euclidean distance from w to the subspace."""
        vec = np.asarray(w, dtype=float).reshape(-1)
        if self.basis.shape[1] == 0:
            return float(np.linalg.norm(vec))
        return float(np.linalg.norm(vec - self.basis @ (self.basis.T @ vec)))


def _orthonormal_range(columns: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space, singular threshold applied."""
    if columns.shape[1] == 0:
        return np.zeros((columns.shape[0], 0))
    left, sing, _ = np.linalg.svd(columns, full_matrices=False)
    rank = int(np.sum(sing > RANGE_THRESHOLD))
    return left[:, :rank]


def exceptional_subspace(s, t, n: int) -> ExceptionalSubspace:
    """X_n = (T - I)(T^n - I)^{-1} (range(S) + T^n range(S)).

    The difference set of two subspaces is their sum, so everything
    reduces to exact finite-dimensional linear algebra. Requires
    ||T|| < 1 so that T^n - I is invertible.
    """
    s = as_operator(s)
    t = as_operator(t)
    if s.shape != t.shape:
        raise ValueError(f"shape mismatch: S {s.shape}, T {t.shape}")
    if n < 1:
        raise ValueError(f"subspace index must be >= 1, got {n}")
    if certified_norm_bound(t) >= 1.0:
        raise PreconditionError("operator norm of T must be < 1")
    d = s.shape[0]
    range_s = _orthonormal_range(s)
    t_pow = np.linalg.matrix_power(t, n)
    combined = _orthonormal_range(np.hstack([range_s, t_pow @ range_s]))
    eye = np.eye(d)
    mapped = (t - eye) @ np.linalg.solve(t_pow - eye, combined)
    basis = _orthonormal_range(mapped)
    basis = basis.copy()
    basis.flags.writeable = False
    return ExceptionalSubspace(n=n, basis=basis)


def exceptional_subspaces(s, t, n_max: int) -> list[ExceptionalSubspace]:
    """The subspaces for n = 1 .. n_max."""
    return [exceptional_subspace(s, t, n) for n in range(1, n_max + 1)]


def distance_to_exceptional_union(s, t, w, n_max: int) -> float:
    """min over n <= n_max of the distance from w to X_n."""
    subspaces = exceptional_subspaces(s, t, n_max)
    return min(sub.distance(w) for sub in subspaces)


@dataclass(frozen=True, eq=False)
class GridSpec:
    """1D or 2D affine slice of w-space: w = base + sum t_i * axis_i."""

    base: np.ndarray
    axes: tuple[np.ndarray, ...]
    ranges: tuple[tuple[float, float], ...]
    steps: tuple[int, ...]

    def __post_init__(self):
        if len(self.axes) not in (1, 2):
            raise ValueError("grid must be 1D or 2D")
        if not (len(self.axes) == len(self.ranges) == len(self.steps)):
            raise ValueError("grid axes, ranges, and steps must align")
        if any(s < 0 for s in self.steps):
            raise ValueError("step counts must be nonnegative")

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def axis_values(self, k: int) -> np.ndarray:
        lo, hi = self.ranges[k]
        n = self.steps[k]
        if n == 0:
            return np.empty(0)
        if n == 1:
            return np.array([lo])
        return np.linspace(lo, hi, n)

    def cells(self):
        """Yield (index tuple, parameter tuple, w vector) in row-major order."""
        values = [self.axis_values(k) for k in range(self.ndim)]
        if self.ndim == 1:
            for i, t1 in enumerate(values[0]):
                yield (i,), (float(t1),), self.base + t1 * self.axes[0]
        else:
            for i, t1 in enumerate(values[0]):
                for j, t2 in enumerate(values[1]):
                    w = self.base + t1 * self.axes[0] + t2 * self.axes[1]
                    yield (i, j), (float(t1), float(t2)), w


@dataclass(frozen=True)
class SweepCell:
    """One grid cell: verdict (or error) plus the exceptional distance."""

    index: tuple[int, ...]
    params: tuple[float, ...]
    w: tuple[float, ...]
    verdict: Verdict | None
    exceptional_distance: float | None
    error: str | None = None


@dataclass(frozen=True, eq=False)
class SweepReport:
    """Cross-tabulation input: all cells of a sweep plus its settings."""

    grid: GridSpec
    cells: tuple[SweepCell, ...]
    target_r: float
    n_max: int

    def verdict_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for c in self.cells:
            key = c.verdict.kind if c.verdict is not None else "error"
            counts[key] = counts.get(key, 0) + 1
        return counts

    def cross_tab(self, distance_threshold: float) -> dict[tuple[str, str], int]:
        """Counts of (verdict kind, near/far of the exceptional union)."""
        table: dict[tuple[str, str], int] = {}
        for c in self.cells:
            kind = c.verdict.kind if c.verdict is not None else "error"
            where = "far" if (c.exceptional_distance or 0.0) > distance_threshold else "near"
            table[(kind, where)] = table.get((kind, where), 0) + 1
        return table


def _sweep_cell(args) -> SweepCell:
    """Worker: classify one grid cell; failures are recorded, not raised."""
    s, t, index, params, w, target_r, rho, bases = args
    if bases:
        exc_dist = min(
            float(np.linalg.norm(w)) if b.shape[1] == 0
            else float(np.linalg.norm(w - b @ (b.T @ w)))
            for b in bases
        )
    else:
        exc_dist = None
    try:
        sys = build_ifs(sw_config(s, t, w))
        approx = attractor(sys, target_r, rho)
        verdict = classify(sys, approx)
        return SweepCell(index=index, params=params, w=tuple(w), verdict=verdict,
                         exceptional_distance=exc_dist)
    except Exception as exc:  # per-cell failures must not kill the sweep
        return SweepCell(index=index, params=params, w=tuple(w), verdict=None,
                         exceptional_distance=exc_dist, error=f"{type(exc).__name__}: {exc}")


def sweep(s, t, grid: GridSpec, target_r: float, rho: float | None = None,
          n_max: int = 8, threads: int = 1) -> SweepReport:
    """Classify every w on the grid and measure its exceptional distance.

    Cells are independent pure computations; with threads > 1 they run in
    a process pool, and the report is assembled in grid order either way,
    so the output is identical for every thread count.
    """
    s = as_operator(s)
    t = as_operator(t)
    for name, mat in (("S", s), ("T", t)):
        if certified_norm_bound(mat) >= 1.0:
            raise PreconditionError(f"operator norm of {name} must be < 1")
    bases = tuple(sub.basis for sub in exceptional_subspaces(s, t, n_max))
    jobs = [
        (s, t, index, params, w, target_r, rho, bases)
        for index, params, w in grid.cells()
    ]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            cells = tuple(pool.map(_sweep_cell, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        cells = tuple(_sweep_cell(job) for job in jobs)
    return SweepReport(grid=grid, cells=cells, target_r=target_r, n_max=n_max)

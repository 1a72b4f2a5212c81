"""Dense real-matrix operator toolkit.

Norms, symmetric eigendecomposition (cyclic Jacobi), spectral projections
onto eigenvalue intervals, polar decomposition, and two norm-certified
contraction constructions built from the defect operator
N = (I - U)^T (I - U) of a contraction U:

* keep the directions where I - U is far from expanding:
  T = (I - U) P with P the spectral projection of N onto (-inf, 1 - eps);
  then ||T|| <= sqrt(1 - eps).
* invert I - U on the strongly expanded directions:
  T = (I - U)^{-1} R with R the orthogonal projection onto the image of
  the eigenspace of N above 1 + eps; then ||T|| <= 1 / sqrt(1 + eps).

All scalars are real; the adjoint is the transpose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DegenerateConstructionError, PreconditionError

# Convergence threshold for the Jacobi sweep, relative to the Frobenius norm.
JACOBI_TOL = 1e-14
# Symmetry gate for eigendecomposition inputs.
SYMMETRY_TOL = 1e-12
# Inflation added to computed operator norms when a certified upper bound
# is required (eigensolver absolute tolerance).
NORM_TOL = 1e-12
# Spectral selections whose interval endpoint sits this close to an
# eigenvalue are rejected as ill-conditioned.
BOUNDARY_GAP = 1e-9
# Eigenvalues of nominally PSD matrices are clamped to zero down to this
# threshold; anything more negative is an error.
PSD_CLAMP = -1e-12
# Slack allowed when checking the contraction certificates.
CERTIFICATE_SLACK = 1e-9
# Smallest admissible singular value for "invertible" inputs.
INVERTIBILITY_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class SymmetricSpectrum:
    """Eigendecomposition of a symmetric matrix.

    eigenvalues are ascending; eigenvectors are the matching orthonormal
    columns, each with its first non-negligible entry made positive so the
    decomposition is deterministic.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralProjection:
    """Orthogonal projection onto the eigenspaces inside an open interval."""

    projection: np.ndarray
    rank: int
    interval: tuple[float, float]


@dataclass(frozen=True, eq=False)
class PolarFactors:
    """A = unitary @ positive with unitary orthogonal and positive PSD."""

    unitary: np.ndarray
    positive: np.ndarray


@dataclass(frozen=True, eq=False)
class CertifiedContraction:
    """A matrix together with a proven operator-norm cap.

    norm is the computed operator norm inflated by the eigensolver
    tolerance; bound is the structural cap it was checked against;
    rank is the rank of the spectral projection used in the construction.
    """

    matrix: np.ndarray
    norm: float
    bound: float
    rank: int


def as_operator(a) -> np.ndarray:
    """Validate and return a square real matrix with finite entries."""
    m = np.asarray(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


@njit(cache=True)
def _jacobi(a, tol_rel, max_sweeps):
    """Cyclic Jacobi rotations on a symmetric matrix.

    Returns (diagonal, accumulated rotations, converged flag). Sweeps stop
    once the off-diagonal Frobenius norm drops below tol_rel times the
    input Frobenius norm.
    """
    d = a.shape[0]
    v = np.eye(d)
    scale = 0.0
    for i in range(d):
        for j in range(d):
            scale += a[i, j] * a[i, j]
    scale = np.sqrt(scale)
    if scale == 0.0:
        return np.zeros(d), v, True
    threshold = tol_rel * scale
    converged = False
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(d - 1):
            for j in range(i + 1, d):
                off += a[i, j] * a[i, j]
        if np.sqrt(2.0 * off) <= threshold:
            converged = True
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = 0.5 * np.arctan2(2.0 * apq, a[q, q] - a[p, p])
                c = np.cos(theta)
                s = np.sin(theta)
                for k in range(d):
                    akp = a[p, k]
                    akq = a[q, k]
                    a[p, k] = c * akp - s * akq
                    a[q, k] = s * akp + c * akq
                for k in range(d):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(d):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    w = np.empty(d)
    for i in range(d):
        w[i] = a[i, i]
    return w, v, converged


def symmetric_eigen(n) -> SymmetricSpectrum:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    The input must be symmetric up to SYMMETRY_TOL (relative, with an
    absolute floor). Eigenvalues come back ascending with a stable order
    on ties; each eigenvector's sign is fixed by its first entry of
    magnitude above 1e-12.
    """
    m = as_operator(n)
    scale = float(np.linalg.norm(m))
    if float(np.linalg.norm(m - m.T)) > SYMMETRY_TOL * max(1.0, scale):
        raise PreconditionError("matrix is not symmetric")
    sym = (m + m.T) / 2.0
    w, v, converged = _jacobi(sym.copy(), JACOBI_TOL, 100)
    if not converged:
        raise PreconditionError("Jacobi sweep did not converge")
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    for j in range(v.shape[1]):
        col = v[:, j]
        lead = np.flatnonzero(np.abs(col) > 1e-12)
        if lead.size and col[lead[0]] < 0.0:
            v[:, j] = -col
    w.flags.writeable = False
    v.flags.writeable = False
    return SymmetricSpectrum(eigenvalues=w, eigenvectors=v)


def adjoint(a) -> np.ndarray:
    """Transpose (real scalars throughout)."""
    return as_operator(a).T.copy()


def singular_values(a) -> np.ndarray:
    """Descending singular values, via the spectrum of A^T A."""
    m = as_operator(a)
    spec = symmetric_eigen(m.T @ m)
    return np.sqrt(np.clip(spec.eigenvalues[::-1], 0.0, None))


def operator_norm(a) -> float:
    """Largest singular value: sqrt of the top eigenvalue of A^T A."""
    m = as_operator(a)
    spec = symmetric_eigen(m.T @ m)
    return float(np.sqrt(max(float(spec.eigenvalues[-1]), 0.0)))


def certified_norm_bound(a) -> float:
    """operator_norm inflated by the eigensolver tolerance (upper bound)."""
    return operator_norm(a) + NORM_TOL


def spectral_projection(spec: SymmetricSpectrum, interval) -> SpectralProjection:
    """Projection onto the eigenvectors whose eigenvalues fall in interval.

    interval is an open (lo, hi) pair; use -inf/inf for half lines. Finite
    endpoints must stay at least BOUNDARY_GAP away from every eigenvalue,
    otherwise the selection is discontinuous in the data and is rejected.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    w = spec.eigenvalues
    for endpoint in (lo, hi):
        if np.isfinite(endpoint) and np.min(np.abs(w - endpoint)) < BOUNDARY_GAP:
            raise PreconditionError(
                f"interval endpoint {endpoint} is within {BOUNDARY_GAP} of an eigenvalue"
            )
    mask = (w > lo) & (w < hi)
    cols = spec.eigenvectors[:, mask]
    p = cols @ cols.T
    p = (p + p.T) / 2.0
    p.flags.writeable = False
    return SpectralProjection(projection=p, rank=int(mask.sum()), interval=(lo, hi))


def selected_eigenvectors(spec: SymmetricSpectrum, interval) -> np.ndarray:
    """Orthonormal columns spanning the range of spectral_projection."""
    proj = spectral_projection(spec, interval)
    lo, hi = proj.interval
    mask = (spec.eigenvalues > lo) & (spec.eigenvalues < hi)
    return spec.eigenvectors[:, mask].copy()


def _psd_sqrt_factors(m) -> tuple[np.ndarray, np.ndarray]:
    """(sqrt(M), sqrt(M)^{-1}) for a PSD matrix, via its spectrum.

    Eigenvalues in [PSD_CLAMP, 0) are clamped to zero; anything below
    PSD_CLAMP means the input was not PSD.
    """
    spec = symmetric_eigen(m)
    w = spec.eigenvalues.copy()
    if float(w[0]) < PSD_CLAMP:
        raise PreconditionError(f"matrix is not positive semidefinite (eigenvalue {w[0]})")
    w = np.clip(w, 0.0, None)
    v = spec.eigenvectors
    root = v @ np.diag(np.sqrt(w)) @ v.T
    with np.errstate(divide="ignore"):
        inv_diag = np.where(w > 0.0, 1.0 / np.sqrt(np.clip(w, 1e-300, None)), 0.0)
    inv_root = v @ np.diag(inv_diag) @ v.T
    return (root + root.T) / 2.0, (inv_root + inv_root.T) / 2.0


def polar_decompose(a) -> PolarFactors:
    """A = U P with U orthogonal and P = sqrt(A^T A) positive semidefinite.

    A must be invertible (smallest singular value above INVERTIBILITY_FLOOR).
    The eigendecomposition of A^T A seeds U = A (A^T A)^{-1/2}; because the
    Gram matrix squares the conditioning, that seed alone can miss the
    orthogonality tolerance on ill-conditioned inputs, so U is polished by
    a few Newton steps U <- (U + U^{-T}) / 2 and P is recovered as the
    symmetric part of U^T A.
    """
    m = as_operator(a)
    gram = (m.T @ m + (m.T @ m).T) / 2.0
    spec = symmetric_eigen(gram)
    smallest = np.sqrt(max(float(spec.eigenvalues[0]), 0.0))
    if smallest <= INVERTIBILITY_FLOOR:
        raise PreconditionError(f"matrix is numerically singular (sigma_min ~ {smallest:.3e})")
    _, inv_root = _psd_sqrt_factors(gram)
    u = m @ inv_root
    eye = np.eye(m.shape[0])
    for _ in range(12):
        if np.linalg.norm(u.T @ u - eye) <= 1e-14 * m.shape[0]:
            break
        u = 0.5 * (u + np.linalg.inv(u).T)
    p = u.T @ m
    p = (p + p.T) / 2.0
    u.flags.writeable = False
    p.flags.writeable = False
    return PolarFactors(unitary=u, positive=p)


def flip_identity_residual(a) -> float:
    """Norm of (I - A A^T) - U (I - A^T A) U^T for the polar unitary U.

    The two sides agree exactly in exact arithmetic; the returned residual
    measures how well the computed factors realize that identity.
    """
    m = as_operator(a)
    u = polar_decompose(m).unitary
    eye = np.eye(m.shape[0])
    lhs = eye - m @ m.T
    rhs = u @ (eye - m.T @ m) @ u.T
    return operator_norm(lhs - rhs)


def corollary_217_residual(s) -> float:
    """Norm of (S + S^T - S S^T) - U (S + S^T - S^T S) U^T, ||S|| < 1.

    U is the polar unitary of I - S (invertible because ||S|| < 1); both
    expressions are orthogonally conjugate, so the residual is pure
    floating-point error.
    """
    m = as_operator(s)
    if operator_norm(m) >= 1.0:
        raise PreconditionError("operator norm must be < 1")
    eye = np.eye(m.shape[0])
    u = polar_decompose(eye - m).unitary
    lhs = m + m.T - m @ m.T
    rhs = u @ (m + m.T - m.T @ m) @ u.T
    return operator_norm(lhs - rhs)


def defect_operator(u) -> np.ndarray:
    """N = (I - U)^T (I - U), symmetric positive semidefinite."""
    m = as_operator(u)
    eye = np.eye(m.shape[0])
    n = (eye - m).T @ (eye - m)
    return (n + n.T) / 2.0


def low_defect_contraction(u, eps: float) -> CertifiedContraction:
    """T = (I - U) P for P the defect projection below 1 - eps.

    Requires ||U|| < 1 and 0 < eps < 1. The certificate
    ||T|| <= sqrt(1 - eps) is checked (with CERTIFICATE_SLACK) and the
    result carries the inflated computed norm plus the projection rank.
    An empty selection is legal and yields the zero matrix.
    """
    m = as_operator(u)
    if not 0.0 < eps < 1.0:
        raise PreconditionError(f"eps must lie in (0, 1), got {eps}")
    if operator_norm(m) >= 1.0:
        raise PreconditionError("operator norm must be < 1")
    spec = symmetric_eigen(defect_operator(m))
    proj = spectral_projection(spec, (-np.inf, 1.0 - eps))
    eye = np.eye(m.shape[0])
    t = (eye - m) @ proj.projection
    bound = float(np.sqrt(1.0 - eps))
    norm = certified_norm_bound(t)
    if norm > bound + CERTIFICATE_SLACK:
        raise PreconditionError(f"norm certificate failed: {norm} > sqrt(1-eps) = {bound}")
    t.flags.writeable = False
    return CertifiedContraction(matrix=t, norm=norm, bound=bound, rank=proj.rank)


def high_defect_contraction(u, eps: float) -> CertifiedContraction:
    """T = (I - U)^{-1} R for R projecting onto (I - U) applied to the
    defect eigenspace above 1 + eps.

    Requires ||U|| < 1 (so I - U is invertible) and eps > 0. The
    certificate ||T|| <= 1 / sqrt(1 + eps) is checked; an empty selection
    yields the zero matrix.
    """
    m = as_operator(u)
    if eps <= 0.0:
        raise PreconditionError(f"eps must be positive, got {eps}")
    if operator_norm(m) >= 1.0:
        raise PreconditionError("operator norm must be < 1")
    spec = symmetric_eigen(defect_operator(m))
    cols = selected_eigenvectors(spec, (1.0 + eps, np.inf))
    d = m.shape[0]
    eye = np.eye(d)
    bound = float(1.0 / np.sqrt(1.0 + eps))
    if cols.shape[1] == 0:
        t = np.zeros((d, d))
        t.flags.writeable = False
        return CertifiedContraction(matrix=t, norm=0.0, bound=bound, rank=0)
    image = (eye - m) @ cols
    q, _ = np.linalg.qr(image)
    r_proj = q @ q.T
    t = np.linalg.solve(eye - m, (r_proj + r_proj.T) / 2.0)
    norm = certified_norm_bound(t)
    if norm > bound + CERTIFICATE_SLACK:
        raise PreconditionError(f"norm certificate failed: {norm} > 1/sqrt(1+eps) = {bound}")
    t.flags.writeable = False
    return CertifiedContraction(matrix=t, norm=norm, bound=bound, rank=cols.shape[1])


def require_nontrivial(contraction: CertifiedContraction, what: str) -> CertifiedContraction:
    """Reject rank-zero constructions where a witness needs substance."""
    if contraction.rank < 1:
        raise DegenerateConstructionError(f"{what}: spectral selection is empty")
    return contraction


def numerical_rank(a, tau: float) -> int:
    """Number of singular values strictly above tau."""
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    return int(np.sum(singular_values(a) > tau))

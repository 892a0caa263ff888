"""Dense symmetric spectral tools, the positive-definiteness test for D - A with
A nonnegative, Metzler classification and Schur complements."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg
from scipy.sparse.csgraph import connected_components

SYM_RTOL = 1e-9
ZERO_RTOL = 1e-8
METZLER_TOL = 1e-12


class NotPositiveDefinite(np.linalg.LinAlgError):
    pass


def zero_tol(M: np.ndarray) -> float:
    """Threshold below which an eigenvalue of ``M`` counts as zero."""
    M = np.atleast_2d(M)
    scale = np.linalg.norm(M, 2) if M.size else 0.0
    return ZERO_RTOL * max(1.0, scale)


def symmetrize(M, rtol: float = SYM_RTOL) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    gap = np.abs(M - M.T).max() if M.size else 0.0
    if gap > rtol * max(1.0, np.abs(M).max()):
        raise ValueError(f"matrix is not symmetric (max asymmetry {gap:.3g})")
    return (M + M.T) / 2


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    tol: float

    @property
    def zero_multiplicity(self) -> int:
        return int(np.sum(np.abs(self.eigenvalues) < self.tol))

    @property
    def kernel_basis(self) -> np.ndarray:
        """Columns spanning the numerical kernel (orthonormal)."""
        return self.eigenvectors[:, np.abs(self.eigenvalues) < self.tol]

    @property
    def min_nonzero(self) -> float | None:
        pos = self.eigenvalues[self.eigenvalues >= self.tol]
        return float(pos[0]) if pos.size else None

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    def is_psd(self) -> bool:
        return self.min_eigenvalue > -self.tol

    def inertia(self) -> tuple[int, int, int]:
        """(positive, negative, zero) eigenvalue counts."""
        ev, t = self.eigenvalues, self.tol
        return int(np.sum(ev >= t)), int(np.sum(ev <= -t)), self.zero_multiplicity


def eig_sym(M, tol: float | None = None) -> SpectralSummary:
    """Eigen-decomposition of the symmetrized matrix, eigenvalues ascending."""
    S = symmetrize(M)
    w, V = np.linalg.eigh(S)
    return SpectralSummary(w, V, zero_tol(S) if tol is None else tol)


def _check_pair(D, A) -> tuple[np.ndarray, np.ndarray]:
    D = np.atleast_2d(np.asarray(D, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if D.shape != A.shape or D.shape[0] != D.shape[1]:
        raise ValueError(f"dimension mismatch: D {D.shape}, A {A.shape}")
    if np.any(D != np.diag(np.diag(D))):
        raise ValueError("D must be diagonal")
    if np.any(A < 0):
        raise ValueError("A must be entrywise nonnegative")
    return D, symmetrize(A)


def lemma3_pd_test(D, A) -> tuple[bool, np.ndarray | None]:
    """Decide whether D - A is positive definite, for D diagonal and A >= 0 symmetric.

    D - A has nonpositive off-diagonal entries, so it is positive definite exactly
    when some v >> 0 has (D - A) v >> 0; and then (D - A)^{-1} >= 0, which makes
    v = (D - A)^{-1} 1 such a vector.  The test therefore solves one linear
    system and inspects the sign of the solution.

    Returns ``(True, v)`` with the certificate ``v`` or ``(False, None)``.
    """
    D, A = _check_pair(D, A)
    K = D - A
    one = np.ones(K.shape[0])
    try:
        v = np.linalg.solve(K, one)
    except np.linalg.LinAlgError:
        return False, None
    if not np.all(np.isfinite(v)) or not np.all(v > 0):
        return False, None
    # reject solves so ill-conditioned that (D - A) v is not actually >> 0
    if not np.all(K @ v > 0):
        return False, None
    return True, v


def nonneg_inverse(D, A) -> np.ndarray:
    """(D - A)^{-1}, checked symmetric and entrywise nonnegative."""
    ok, _ = lemma3_pd_test(D, A)
    if not ok:
        raise NotPositiveDefinite("D - A is not positive definite")
    D, A = _check_pair(D, A)
    X = linalg.cho_solve(linalg.cho_factor(D - A), np.eye(D.shape[0]))
    X = (X + X.T) / 2
    assert X.min() >= -1e-12, f"inverse has negative entry {X.min():.3g}"
    return X


def schur_complement(M, head: int) -> np.ndarray:
    """M22 - M21 M11^{-1} M12 for the leading ``head`` x ``head`` block M11."""
    M = symmetrize(M)
    n = M.shape[0]
    if not 0 < head < n:
        raise ValueError(f"head must be in [1, {n - 1}], got {head}")
    M11, M12, M22 = M[:head, :head], M[:head, head:], M[head:, head:]
    try:
        c = linalg.cho_factor(M11)
    except linalg.LinAlgError:
        raise NotPositiveDefinite("leading block is not positive definite") from None
    S = M22 - M12.T @ linalg.cho_solve(c, M12)
    return (S + S.T) / 2


@dataclass(frozen=True)
class MetzlerSummary:
    is_metzler: bool
    is_irreducible: bool
    frobenius_eig: float | None


def metzler_summary(M) -> MetzlerSummary:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n = M.shape[0]
    off = ~np.eye(n, dtype=bool)
    is_metzler = bool(np.all(M[off] >= -METZLER_TOL))
    pattern = (np.abs(M) > METZLER_TOL) & off
    ncomp, _ = connected_components(pattern.astype(np.int8), directed=True, connection="strong")
    frob = float(np.max(np.linalg.eigvals(M).real)) if is_metzler else None
    return MetzlerSummary(is_metzler, ncomp == 1, frob)


@dataclass(frozen=True, eq=False)
class ClosedLoop:
    """Closed-loop matrix M = D - A with its spectrum computed once."""

    matrix: np.ndarray

    @classmethod
    def from_gains(cls, d, A) -> "ClosedLoop":
        return cls(np.diag(np.asarray(d, dtype=float)) - np.asarray(A, dtype=float))

    @cached_property
    def spectrum(self) -> SpectralSummary:
        return eig_sym(self.matrix)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def as_matrix(M) -> np.ndarray:
    return M.matrix if isinstance(M, ClosedLoop) else np.atleast_2d(np.asarray(M, dtype=float))


def as_closed_loop(M) -> ClosedLoop:
    return M if isinstance(M, ClosedLoop) else ClosedLoop(as_matrix(M))

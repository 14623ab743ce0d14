"""Dense eigen/singular-value kernel.

LAPACK (through :mod:`scipy.linalg`) does the Hessenberg reduction and the
shifted QR iteration; this module adds the normalization conventions used by
the optimizers: unit left/right eigenvectors with a real positive inner
product, an optional phase anchor, and residual-driven refinement by inverse
iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateEigenvalue, DimensionMismatch, NonConvergence

__all__ = [
    "EigenTriple",
    "rightmost_eigentriple",
    "smallest_singular_value",
    "all_eigenvalues",
    "inner",
    "frobenius",
    "eig_tolerance",
]

GAP_WARNING = 1e-8
DEGENERATE = 1e-14


@dataclass(frozen=True)
class EigenTriple:
    """Rightmost eigenvalue with normalized left (``x``) and right (``y``) eigenvectors."""

    lam: complex
    x: np.ndarray
    y: np.ndarray
    kappa: float
    gap: float

    @property
    def gap_warning(self) -> bool:
        return self.gap < GAP_WARNING

    @property
    def xy(self) -> np.ndarray:
        """The rank-1 matrix x y^*."""
        return np.outer(self.x, self.y.conj())


def inner(X, Y) -> complex:
    """Frobenius inner product trace(X^* Y)."""
    return complex(np.vdot(X, Y))


def frobenius(X) -> float:
    return float(np.linalg.norm(X))


def _check_square(M) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def eig_tolerance(M) -> float:
    return 1e-10 * max(frobenius(M), 1.0)


def _select(w: np.ndarray, scale: float) -> int:
    # rightmost, ties (within roundoff) broken by largest imaginary part
    re = w.real
    top = re.max()
    tie = np.flatnonzero(re >= top - 8 * np.finfo(float).eps * scale)
    return int(tie[np.argmax(w.imag[tie])])


def _refine(M, lam, vec, tol, left=False, iters=3):
    """A few steps of inverse iteration for one eigenvector."""
    n = M.shape[0]
    B = M.conj().T if left else M
    mu = np.conj(lam) if left else lam
    shift = mu + 1e-12 * max(abs(mu), 1.0)
    lu = sla.lu_factor(B - shift * np.eye(n))
    for _ in range(iters):
        vec = sla.lu_solve(lu, vec)
        vec = vec / np.linalg.norm(vec)
        if np.linalg.norm(B @ vec - mu * vec) <= tol:
            break
    return vec


def rightmost_eigentriple(M, phase_anchor=None) -> EigenTriple:
    """Eigentriple of the eigenvalue of maximal real part.

    Parameters
    ----------
    M : (n, n) array_like
        Square matrix with finite entries.
    phase_anchor : (n,) array_like, optional
        If given, ``x`` is rotated so that ``x^* phase_anchor`` is real and
        positive, and ``y`` is rotated along with it.

    Returns
    -------
    EigenTriple
        ``x`` and ``y`` have unit norm and ``x^* y > 0``.

    Raises
    ------
    NonConvergence
        If LAPACK's QR iteration fails.
    DegenerateEigenvalue
        If ``|x^* y| < 1e-14`` (defective rightmost eigenvalue).
    """
    M = _check_square(M)
    try:
        w, vl, vr = sla.eig(M, left=True, right=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    scale = max(frobenius(M), 1.0)
    i = _select(w, scale)
    lam = complex(w[i])
    x = vl[:, i] / np.linalg.norm(vl[:, i])
    y = vr[:, i] / np.linalg.norm(vr[:, i])

    tol = eig_tolerance(M)
    if np.linalg.norm(M @ y - lam * y) > tol:
        y = _refine(M, lam, y, tol)
    if np.linalg.norm(x.conj() @ M - lam * x.conj()) > tol:
        x = _refine(M, lam, x, tol, left=True)

    xy = np.vdot(x, y)
    if abs(xy) < DEGENERATE:
        raise DegenerateEigenvalue(
            f"rightmost eigenvalue {lam:.6g} is numerically defective (|x*y| = {abs(xy):.3g})"
        )
    if phase_anchor is not None:
        xu = np.vdot(x, np.asarray(phase_anchor))
        if abs(xu) > 0:
            x = x * (xu / abs(xu))
        xy = np.vdot(x, y)
    y = y * (np.conj(xy) / abs(xy))
    kappa = 1.0 / abs(xy)

    others = np.delete(w, i)
    gap = float(np.min(lam.real - others.real)) if others.size else np.inf
    return EigenTriple(lam=lam, x=x, y=y, kappa=kappa, gap=max(gap, 0.0))


def smallest_singular_value(M) -> float:
    M = _check_square(M)
    return float(sla.svdvals(M, check_finite=False)[-1])


def all_eigenvalues(M) -> np.ndarray:
    M = _check_square(M)
    try:
        return sla.eigvals(M, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc

"""Resolvent-norm grids, imaginary-axis sweeps and joint-pseudospectrum sampling."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar
from skimage.measure import find_contours

from .linalg import all_eigenvalues, smallest_singular_value

__all__ = [
    "GridSpec",
    "ResolventField",
    "default_grid",
    "enclosing_grid",
    "resolvent_field",
    "level_contours",
    "axis_sweep",
    "make_rng",
    "sample_structured",
    "sample_unstructured",
    "joint_pseudospectrum_sample",
    "worker_count",
]


def worker_count():
    """Thread cap from ``STABRAD_THREADS`` (default: CPU count)."""
    env = os.environ.get("STABRAD_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("grid window must have re_min < re_max and im_min < im_max")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per direction")

    @property
    def re(self):
        return np.linspace(self.re_min, self.re_max, self.nx)

    @property
    def im(self):
        return np.linspace(self.im_min, self.im_max, self.ny)

    def nodes(self):
        """Complex node values, shape (nx, ny)."""
        return self.re[:, None] + 1j * self.im[None, :]

    def to_complex(self, rows, cols):
        """Map fractional (row, col) indices to points of the plane."""
        dx = (self.re_max - self.re_min) / (self.nx - 1)
        dy = (self.im_max - self.im_min) / (self.ny - 1)
        return (self.re_min + rows * dx) + 1j * (self.im_min + cols * dy)


@dataclass(frozen=True)
class ResolventField:
    grid: GridSpec
    values: np.ndarray  # sigma_min(A - z I), shape (nx, ny)


def default_grid(A, nx=101, ny=101, margin=0.2):
    """Window around the spectrum of ``A`` with a relative margin."""
    w = all_eigenvalues(A)
    lo_r, hi_r, lo_i, hi_i = w.real.min(), w.real.max(), w.imag.min(), w.imag.max()
    span = max(hi_r - lo_r, hi_i - lo_i, 1.0)
    pad = margin * span
    return GridSpec(lo_r - pad, hi_r + pad, lo_i - pad, hi_i + pad, nx, ny)


def enclosing_grid(A, level, nx=201, ny=201, pad=0.05):
    """Window guaranteed to contain the level-``level`` pseudospectrum.

    The pseudospectrum lies within ``level`` of the numerical range, whose
    bounding box is given by the extreme eigenvalues of the Hermitian and
    skew-Hermitian parts of ``A``.
    """
    A = np.asarray(A)
    H = 0.5 * (A + A.conj().T)
    K = -0.5j * (A - A.conj().T)
    h = sla.eigvalsh(H)
    k = sla.eigvalsh(K)
    r = level * (1 + pad) + pad
    return GridSpec(h[0] - r, h[-1] + r, k[0] - r, k[-1] + r, nx, ny)


def resolvent_field(A, grid: GridSpec, threads=None) -> ResolventField:
    """``sigma_min(A - z I)`` on every grid node."""
    A = np.asarray(A, dtype=complex)
    z = grid.nodes()

    def row(i):
        return _sigma_min_batch(A, z[i])

    threads = threads or worker_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, range(grid.nx)))
    else:
        rows = [row(i) for i in range(grid.nx)]
    return ResolventField(grid=grid, values=np.array(rows, dtype=float))


def level_contours(field: ResolventField, level: float):
    """Marching-squares contours of the level set ``sigma_min = level``.

    Works on the logarithm of the field, which is better conditioned near
    eigenvalues. Returns a list of complex arrays; closed contours repeat
    their first point at the end.
    """
    if level <= 0:
        raise ValueError("level must be positive")
    logv = np.log(np.maximum(field.values, np.finfo(float).tiny))
    out = []
    for c in find_contours(logv, np.log(level)):
        out.append(field.grid.to_complex(c[:, 0], c[:, 1]))
    return out


def _axis_width(A):
    # ||A||_2 <= sqrt(||A||_1 ||A||_inf); beyond |w| = 2 ||A||_2 the
    # smallest singular value of A - iwI exceeds ||A||_2 >= sigma_min(A)
    A = np.asarray(A)
    return 2.0 * np.sqrt(np.abs(A).sum(axis=0).max() * np.abs(A).sum(axis=1).max()) + 1.0


def _sigma_min_batch(A, zs, chunk=1024):
    """``sigma_min(A - z I)`` for a vector of shifts via stacked SVDs."""
    A = np.asarray(A, dtype=complex)
    eye = np.eye(A.shape[0])
    out = np.empty(len(zs))
    for k in range(0, len(zs), chunk):
        z = zs[k : k + chunk]
        stack = A[None] - z[:, None, None] * eye
        out[k : k + chunk] = np.linalg.svd(stack, compute_uv=False)[:, -1]
    return out


def axis_sweep(A, omega_lo=None, omega_hi=None, n_points=4001):
    """Minimize ``sigma_min(A - i w I)`` over real ``w``.

    Uniform grid followed by golden-section refinement around the best node.
    For real ``A`` the default range is ``w >= 0`` (conjugate symmetry).

    Returns
    -------
    (omega_star, sigma_star)
    """
    A = np.asarray(A)
    n = A.shape[0]
    if omega_hi is None:
        omega_hi = _axis_width(A)
    if omega_lo is None:
        omega_lo = 0.0 if np.isrealobj(A) else -omega_hi
    eye = np.eye(n)

    def f(w):
        return smallest_singular_value(A - 1j * w * eye)

    omegas = np.linspace(omega_lo, omega_hi, n_points)
    vals = _sigma_min_batch(A, 1j * omegas)
    i = int(np.argmin(vals))
    a = omegas[max(i - 1, 0)]
    b = omegas[min(i + 1, n_points - 1)]
    if 0 < i < n_points - 1:
        res = minimize_scalar(f, bracket=(a, omegas[i], b), method="golden", tol=1e-12)
    else:
        res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
    if res.fun <= vals[i]:
        return float(res.x), float(res.fun)
    return float(omegas[i]), float(vals[i])


def make_rng(seed):
    """Seeded PCG64 generator (the numpy default bit generator)."""
    return np.random.Generator(np.random.PCG64(seed))


def sample_structured(S, radius, rng, fixed_radius=False):
    """Random element of S with Frobenius norm at most ``radius``.

    The direction is uniform on the unit sphere of S: an isotropic Gaussian
    in the ambient space, projected orthogonally onto S, stays isotropic on S.
    The radius is ``radius * U**(1/dim S)`` (uniform in the ball) unless
    ``fixed_radius``.
    """
    n = S.dim
    if radius == 0:
        return np.zeros((n, n), dtype=complex)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    D = S.project(Z)
    nrm = np.linalg.norm(D)
    if nrm == 0:
        return np.zeros((n, n), dtype=complex)
    r = radius if fixed_radius else radius * rng.random() ** (1.0 / max(S.real_dimension, 1))
    return D * (r / nrm)


def sample_unstructured(n, radius, rng, fixed_radius=False):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if radius == 0:
        return np.zeros((n, n), dtype=complex)
    r = radius if fixed_radius else radius * rng.random() ** (1.0 / (2 * n * n))
    return Z * (r / np.linalg.norm(Z))


def joint_pseudospectrum_sample(A, S, eps, delta, n_samples, rng_seed=0, fixed_radius=False, threads=None):
    """Eigenvalues of ``A + Delta + Theta`` for random admissible pairs.

    ``Delta`` in S with ``||Delta||_F <= delta`` and unstructured ``Theta`` with
    ``||Theta||_F <= eps``. Every returned point lies in the joint
    pseudospectrum, so the clouds are an inner approximation of it.

    Returns
    -------
    list of ndarray
        One array of n eigenvalues per sample, in sample order.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    A = np.asarray(A)
    n = A.shape[0]
    rng = make_rng(rng_seed)
    # draw sequentially so results do not depend on the thread count
    pairs = []
    for _ in range(n_samples):
        D = sample_structured(S, delta, rng, fixed_radius) if S is not None else np.zeros((n, n))
        T = sample_unstructured(n, eps, rng, fixed_radius)
        pairs.append((D, T))

    def eigs(pair):
        D, T = pair
        return all_eigenvalues(A + D + T)

    threads = threads or worker_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(eigs, pairs))
    return [eigs(p) for p in pairs]

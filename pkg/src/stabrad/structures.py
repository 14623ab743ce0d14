"""Structure spaces and their orthogonal projections.

A structure space is a real-linear subspace S of complex n-by-n matrices.
The projection is orthogonal with respect to the real pairing
``Re <X, Y> = Re trace(X^* Y)``, i.e. ``Re <P(Z), W> = Re <Z, W>`` for all W in S.

Five named kinds are supported:

============== ===============================================================
full-complex    identity
full-real       entrywise real part
sparsity        mask (``real=False``) or mask then real part (``real=True``)
toeplitz-real   per-diagonal mean of real parts, for diagonals -p..q
============== ===============================================================

The Toeplitz diagonal basis matrices are mutually orthogonal, so projecting
onto their span reduces to averaging each diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch

__all__ = [
    "StructureSpace",
    "BasisStructure",
    "project",
    "membership_residual",
    "real_basis",
]

KINDS = ("full-complex", "full-real", "sparsity-complex", "sparsity-real", "toeplitz-real")


@dataclass(frozen=True)
class StructureSpace:
    kind: str
    dim: int
    pattern: tuple = ()
    band: tuple = ()
    _mask: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown structure kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.kind.startswith("sparsity"):
            pattern = tuple(sorted((int(i), int(j)) for i, j in self.pattern))
            if len(set(pattern)) != len(pattern):
                raise ValueError("duplicate indices in sparsity pattern")
            for i, j in pattern:
                if not (0 <= i < self.dim and 0 <= j < self.dim):
                    raise ValueError(f"pattern index ({i}, {j}) outside a {self.dim}x{self.dim} matrix")
            mask = np.zeros((self.dim, self.dim), dtype=bool)
            if pattern:
                rows, cols = zip(*pattern)
                mask[list(rows), list(cols)] = True
            mask.setflags(write=False)
            object.__setattr__(self, "pattern", pattern)
            object.__setattr__(self, "_mask", mask)
        if self.kind == "toeplitz-real":
            p, q = (int(b) for b in self.band)
            if p < 0 or q < 0 or p >= self.dim or q >= self.dim:
                raise ValueError(f"invalid band ({p}, {q}) for dimension {self.dim}")
            object.__setattr__(self, "band", (p, q))

    # constructors -----------------------------------------------------

    @classmethod
    def full_complex(cls, n):
        return cls("full-complex", n)

    @classmethod
    def full_real(cls, n):
        return cls("full-real", n)

    @classmethod
    def sparsity(cls, pattern, n, real=True):
        return cls("sparsity-real" if real else "sparsity-complex", n, pattern=tuple(pattern))

    @classmethod
    def sparsity_of(cls, A, real=True):
        """Sparsity structure given by the nonzero entries of ``A``."""
        A = np.asarray(A)
        rows, cols = np.nonzero(A)
        return cls.sparsity(zip(rows, cols), A.shape[0], real=real)

    @classmethod
    def toeplitz_band(cls, n, p, q):
        return cls("toeplitz-real", n, band=(p, q))

    # ------------------------------------------------------------------

    @property
    def is_real(self) -> bool:
        return self.kind in ("full-real", "sparsity-real", "toeplitz-real")

    @property
    def mask(self):
        return self._mask

    @property
    def real_dimension(self) -> int:
        """Dimension of S as a real vector space."""
        n = self.dim
        if self.kind == "full-complex":
            return 2 * n * n
        if self.kind == "full-real":
            return n * n
        if self.kind == "sparsity-complex":
            return 2 * len(self.pattern)
        if self.kind == "sparsity-real":
            return len(self.pattern)
        p, q = self.band
        return p + q + 1

    def project(self, Z) -> np.ndarray:
        Z = np.asarray(Z)
        if Z.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"matrix of shape {Z.shape} for a structure of dimension {self.dim}")
        kind = self.kind
        if kind == "full-complex":
            return Z.astype(complex, copy=True)
        if kind == "full-real":
            return np.real(Z).astype(float)
        if kind == "sparsity-complex":
            return np.where(self._mask, Z, 0).astype(complex)
        if kind == "sparsity-real":
            return np.where(self._mask, np.real(Z), 0.0)
        n = self.dim
        p, q = self.band
        out = np.zeros((n, n))
        Zr = np.real(Z)
        for d in range(-p, q + 1):
            mean = np.diagonal(Zr, d).mean()
            idx = np.arange(n - abs(d))
            if d >= 0:
                out[idx, idx + d] = mean
            else:
                out[idx - d, idx] = mean
        return out

    def membership_residual(self, Z) -> float:
        Z = np.asarray(Z)
        return float(np.linalg.norm(Z - self.project(Z)))

    def spec(self) -> str:
        """Short textual description, e.g. ``toeplitz-real:1,3``."""
        if self.kind == "toeplitz-real":
            return f"toeplitz-real:{self.band[0]},{self.band[1]}"
        if self.kind.startswith("sparsity"):
            return f"{self.kind}:nnz={len(self.pattern)}"
        return self.kind


def project(S, Z):
    return S.project(Z)


def membership_residual(S, Z):
    return S.membership_residual(Z)


def real_basis(S):
    """An explicit real basis of S as an array of shape (m, n, n).

    Built independently of ``S.project`` (from the definition of each kind),
    so it can serve as a least-squares oracle for the projection.
    """
    n = S.dim
    units = []
    kind = S.kind

    def unit(i, j, val=1.0):
        B = np.zeros((n, n), dtype=complex)
        B[i, j] = val
        return B

    if kind in ("full-complex", "full-real"):
        entries = [(i, j) for i in range(n) for j in range(n)]
    elif kind.startswith("sparsity"):
        entries = list(S.pattern)
    else:
        entries = None

    if entries is not None:
        for i, j in entries:
            units.append(unit(i, j))
            if kind.endswith("complex"):
                units.append(unit(i, j, 1j))
    else:
        p, q = S.band
        for d in range(-p, q + 1):
            units.append(np.eye(n, k=d).astype(complex))
    if not units:
        return np.zeros((0, n, n), dtype=complex)
    return np.array(units)


class BasisStructure:
    """Structure space given by an explicit real basis.

    The projection solves the normal equations with the real Gram matrix
    ``Re <B_i, B_j>``; the basis need not be orthogonal.
    """

    def __init__(self, basis, is_real=None):
        basis = np.asarray(basis, dtype=complex)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise ValueError("basis must have shape (m, n, n)")
        self.basis = basis
        self.dim = basis.shape[1]
        self.kind = "basis"
        self._flat = basis.reshape(basis.shape[0], -1)
        # real coordinates: stack real and imaginary parts
        self._real = np.concatenate([self._flat.real, self._flat.imag], axis=1)
        self._gram = self._real @ self._real.T
        self.is_real = bool(np.all(basis.imag == 0)) if is_real is None else is_real

    @property
    def real_dimension(self):
        return int(np.linalg.matrix_rank(self._gram))

    def coefficients(self, Z):
        Z = np.asarray(Z, dtype=complex)
        if Z.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"matrix of shape {Z.shape} for a structure of dimension {self.dim}")
        z = Z.ravel()
        rhs = self._real @ np.concatenate([z.real, z.imag])
        coef, *_ = np.linalg.lstsq(self._gram, rhs, rcond=None)
        return coef

    def project(self, Z):
        coef = self.coefficients(Z)
        out = np.tensordot(coef, self.basis, axes=1)
        return out.real.copy() if self.is_real else out

    def membership_residual(self, Z):
        return float(np.linalg.norm(np.asarray(Z) - self.project(Z)))

    def spec(self):
        return f"basis:m={self.basis.shape[0]}"

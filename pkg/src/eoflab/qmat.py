"""Dense complex matrix kernel: products, decompositions, unitary exponentials.

Everything downstream moves through these few wrappers so that conventions
(eigenvalue ordering, Hermitization, size guards) are fixed in one place.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

DEFAULT_MAX_DIM = 4096
HERM_TOL = 1e-9


class ShapeError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


class SymmetryError(ValueError):
    """A matrix required to be Hermitian is not, beyond tolerance."""


class SizeError(ValueError):
    """A result would exceed the configured maximum total dimension."""


class HermEig(NamedTuple):
    """Eigensystem of a Hermitian matrix, eigenvalues non-increasing."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


class SvdResult(NamedTuple):
    """Singular value decomposition a = u @ diag(s) @ v.conj().T."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a 2-d complex array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ShapeError(f"expected a matrix, got ndim={m.ndim}")
    if not np.isfinite(m).all():
        raise ValueError("matrix has non-finite entries")
    return m


def kron(a, b, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Kronecker product with a guard on the total dimension."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if max(rows, cols) > max_dim:
        raise SizeError(f"kron result {rows}x{cols} exceeds max dimension {max_dim}")
    return np.kron(a, b)


def dagger(a) -> np.ndarray:
    """Conjugate transpose."""
    return as_cmatrix(a).conj().T


def hermitianize(a) -> np.ndarray:
    """(a + a†)/2, the projection used before every eigendecomposition."""
    a = as_cmatrix(a)
    return (a + a.conj().T) / 2


def herm_defect(a) -> float:
    """Max-entry distance from Hermitian symmetry."""
    a = as_cmatrix(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def herm_eig(a, tol: float = HERM_TOL) -> HermEig:
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues come back in non-increasing order and each eigenvector's
    first significant component is made real positive, so the result is a
    deterministic function of the input.  Inputs further than `tol` from
    Hermitian raise SymmetryError; closer ones are Hermitized first.
    """
    a = as_cmatrix(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"herm_eig needs a square matrix, got {a.shape}")
    if herm_defect(a) > tol:
        raise SymmetryError(f"matrix is not Hermitian within {tol:g}")
    w, v = np.linalg.eigh(hermitianize(a))
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    # canonical phase: first component with magnitude above threshold -> real positive
    for k in range(v.shape[1]):
        col = v[:, k]
        idx = np.argmax(np.abs(col) > 1e-8)
        pivot = col[idx]
        if np.abs(pivot) > 0:
            v[:, k] = col * (np.abs(pivot) / pivot)
    return HermEig(w, v)


def svd(a) -> SvdResult:
    """Singular value decomposition, singular values non-increasing."""
    a = as_cmatrix(a)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    return SvdResult(u, s, vh.conj().T)


def expm_antihermitian(h, tol: float = HERM_TOL) -> np.ndarray:
    """exp(i*h) for Hermitian h, via the eigendecomposition; result unitary."""
    h = as_cmatrix(h)
    if h.shape[0] != h.shape[1]:
        raise ShapeError(f"expm_antihermitian needs a square matrix, got {h.shape}")
    if herm_defect(h) > tol:
        raise SymmetryError(f"generator is not Hermitian within {tol:g}")
    w, v = np.linalg.eigh(hermitianize(h))
    return (v * np.exp(1j * w)) @ v.conj().T

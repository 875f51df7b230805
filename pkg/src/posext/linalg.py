"""Dense complex matrix algebra: Hermitian eigendecompositions, Kronecker
products, norms and cone projections used by every other module.

All matrices are numpy arrays of complex128.  Operations are pure functions
and never mutate their arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonHermitianInput

HERM_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    """Coerce to a 2-d complex array, rejecting NaN/Inf entries."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("matrix contains NaN or Inf entries")
    return a


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return (m + m.conj().T) / 2


def skew_part(m: np.ndarray) -> np.ndarray:
    """Hermitian matrix s with m = hermitian_part(m) + 1j*s."""
    return (m - m.conj().T) / 2j


def herm_defect(m: np.ndarray) -> float:
    """Largest entrywise deviation of m from its Hermitian part."""
    return float(np.abs(m - m.conj().T).max(initial=0.0)) / 2


def require_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Return the symmetrized matrix, or raise if the defect exceeds tol."""
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NonHermitianInput(f"matrix is not square: shape {m.shape}")
    defect = herm_defect(m)
    if defect > tol:
        raise NonHermitianInput(f"Hermitian defect {defect:.3e} exceeds tolerance {tol:.1e}")
    return hermitian_part(m)


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product Tr(a* b)."""
    return complex(np.sum(a.conj() * b))


def frob_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product a (x) b."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


@dataclass
class HermitianEig:
    """Eigendecomposition of a Hermitian matrix.

    eigenvalues are ascending; columns of eigenvectors are the matching
    orthonormal eigenvectors, so U diag(w) U* reconstructs the input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def hermitian_eig(m: np.ndarray, tol: float = HERM_TOL) -> HermitianEig:
    """Eigendecomposition after symmetrizing; rejects non-Hermitian input."""
    h = require_hermitian(m, tol)
    w, u = np.linalg.eigh(h)
    return HermitianEig(eigenvalues=w, eigenvectors=u)


def eigvals_hermitian(m: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Ascending eigenvalues of a (nearly) Hermitian matrix."""
    return np.linalg.eigvalsh(require_hermitian(m, tol))


def min_eig(m: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of m (no tolerance check)."""
    return float(np.linalg.eigvalsh(hermitian_part(m))[0])


def psd_project(m: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Nearest positive semidefinite matrix in Frobenius norm."""
    eig = hermitian_eig(m, tol)
    w = np.maximum(eig.eigenvalues, 0.0)
    u = eig.eigenvectors
    out = (u * w) @ u.conj().T
    return hermitian_part(out)


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value, via the top eigenvalue of m* m."""
    a = np.asarray(m, dtype=complex)
    w = np.linalg.eigvalsh(a.conj().T @ a)
    return float(np.sqrt(max(w[-1], 0.0)))


def trace_norm(m: np.ndarray) -> float:
    """Sum of singular values."""
    s = np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)
    return float(s.sum())


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return hermitian_part(g) * scale


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def random_psd(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    """Random positive semidefinite matrix g g* with Gaussian factor."""
    r = n if rank is None else rank
    g = ginibre(rng, n, r)
    return hermitian_part(g @ g.conj().T)

"""Operator systems: linear subspaces of a matrix algebra containing the
identity, in a real self-adjoint or complex flavor.

All geometry lives in the real vector space of Hermitian matrices with the
inner product Re Tr(x* y); complex systems are handled through their
self-adjoint parts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    ClosureNotReached,
    DimensionMismatch,
    IdentityNotInSpan,
    NonHermitianGenerator,
    NotSelfAdjointClosed,
)
from .linalg import (
    HERM_TOL,
    as_matrix,
    frob_norm,
    hermitian_part,
    herm_defect,
    matrix_unit,
    skew_part,
)

REAL_SA = "real-sa"
COMPLEX = "complex"

GS_DROP_TOL = 1e-9


def _gram_schmidt_hermitian(candidates: list[np.ndarray]) -> list[np.ndarray]:
    """Orthonormalize Hermitian matrices over the reals, HS inner product.

    Order-preserving classical Gram-Schmidt with one re-orthogonalization
    pass; candidates with residual norm below GS_DROP_TOL are dropped as
    dependent.  The output order is therefore deterministic given the
    input order.
    """
    basis: list[np.ndarray] = []
    for cand in candidates:
        v = hermitian_part(cand)
        for _ in range(2):
            for b in basis:
                v = v - np.sum(b * v.conj()).real * b
        norm = frob_norm(v)
        if norm < GS_DROP_TOL:
            continue
        basis.append(v / norm)
    return basis


def _complex_span_basis(mats: list[np.ndarray]) -> np.ndarray:
    """Orthonormal basis (rows) of the complex span of the given matrices."""
    n = mats[0].shape[0]
    stack = np.stack([m.reshape(n * n) for m in mats])
    u, s, vh = np.linalg.svd(stack, full_matrices=False)
    keep = s > GS_DROP_TOL * max(1.0, s[0] if len(s) else 1.0)
    return vh[keep]


def _dist_to_complex_span(basis_rows: np.ndarray, m: np.ndarray) -> float:
    v = m.reshape(-1)
    proj = basis_rows.conj().T @ (basis_rows @ v)
    return float(np.linalg.norm(v - proj))


@dataclass
class OperatorSystem:
    """Span of generator matrices in a matrix algebra, containing 1.

    ortho_basis is the HS-orthonormal Hermitian basis of the self-adjoint
    part, in deterministic Gram-Schmidt order.
    """

    dim: int
    flavor: str
    generators: list[np.ndarray]
    ortho_basis: list[np.ndarray]
    basis_stack: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.basis_stack is None:
            self.basis_stack = np.stack(self.ortho_basis)

    @property
    def sa_dim(self) -> int:
        return len(self.ortho_basis)

    def is_full(self) -> bool:
        return self.sa_dim == self.dim * self.dim

    def coords(self, h: np.ndarray) -> np.ndarray:
        """Real HS coordinates of a Hermitian matrix over ortho_basis."""
        return np.einsum("kij,ij->k", self.basis_stack, np.asarray(h, dtype=complex).conj()).real

    def combine(self, coords: np.ndarray) -> np.ndarray:
        """Hermitian matrix with the given real coordinates."""
        return np.tensordot(np.asarray(coords, dtype=float), self.basis_stack, axes=1)

    def project(self, m: np.ndarray) -> np.ndarray:
        """HS-orthogonal projection of (the Hermitian part of) m onto the span."""
        m = as_matrix(m)
        if m.shape != (self.dim, self.dim):
            raise DimensionMismatch(f"expected shape {(self.dim, self.dim)}, got {m.shape}")
        return self.combine(self.coords(hermitian_part(m)))

    def contains(self, m: np.ndarray, tol: float = 1e-9) -> bool:
        """Whether both Hermitian parts of m lie in the span within tol."""
        m = as_matrix(m)
        if m.shape != (self.dim, self.dim):
            return False
        h, s = hermitian_part(m), skew_part(m)
        d2 = frob_norm(h - self.combine(self.coords(h))) ** 2
        d2 += frob_norm(s - self.combine(self.coords(s))) ** 2
        return np.sqrt(d2) < tol

    def sample_psd_element(self, rng_seed: int) -> np.ndarray:
        """Random PSD element of the system, with boundary coverage.

        Draws Gaussian coordinates, shifts by -lambda_min plus a uniform
        offset in [0, 0.1]; membership is exact because 1 is in the span.
        """
        rng = np.random.default_rng(rng_seed)
        a = self.combine(rng.standard_normal(self.sa_dim))
        lam = float(np.linalg.eigvalsh(a)[0])
        u = rng.uniform(0.0, 0.1)
        return a + (u - lam) * np.eye(self.dim)


def _validate_identity(basis: list[np.ndarray], dim: int) -> None:
    eye = np.eye(dim, dtype=complex)
    resid = eye.copy()
    for b in basis:
        resid = resid - np.sum(b * resid.conj()).real * b
    if frob_norm(resid) > 1e-10 * np.sqrt(dim):
        raise IdentityNotInSpan(f"identity is {frob_norm(resid):.3e} away from the generator span")


def build(dim_h: int, flavor: str, generators: list[np.ndarray]) -> OperatorSystem:
    """Validate generators and construct the system with its ortho basis."""
    gens = [as_matrix(g) for g in generators]
    if not gens:
        raise IdentityNotInSpan("no generators given")
    for g in gens:
        if g.shape != (dim_h, dim_h):
            raise DimensionMismatch(f"generator shape {g.shape} != {(dim_h, dim_h)}")

    if flavor == REAL_SA:
        for g in gens:
            if herm_defect(g) > HERM_TOL:
                raise NonHermitianGenerator(
                    f"generator has Hermitian defect {herm_defect(g):.3e}"
                )
        candidates = [hermitian_part(g) for g in gens]
    elif flavor == COMPLEX:
        span = _complex_span_basis(gens)
        for g in gens:
            d = _dist_to_complex_span(span, g.conj().T)
            if d > 1e-10 * max(1.0, frob_norm(g)):
                raise NotSelfAdjointClosed(f"adjoint of a generator is {d:.3e} off the span")
        candidates = []
        for g in gens:
            candidates.append(hermitian_part(g))
            candidates.append(skew_part(g))
    else:
        raise ValueError(f"unknown flavor {flavor!r}")

    basis = _gram_schmidt_hermitian(candidates)
    _validate_identity(basis, dim_h)
    return OperatorSystem(dim=dim_h, flavor=flavor, generators=gens, ortho_basis=basis)


def from_subalgebra_sa(dim_h: int, algebra_generators: list[np.ndarray]) -> OperatorSystem:
    """Self-adjoint part of the unital *-algebra generated by the inputs.

    The closure is computed by iterating products and adjoints until the
    complex span stabilizes, capped at dim_h**4 rounds.
    """
    gens = [as_matrix(g) for g in algebra_generators]
    for g in gens:
        if g.shape != (dim_h, dim_h):
            raise DimensionMismatch(f"generator shape {g.shape} != {(dim_h, dim_h)}")
    seed = [np.eye(dim_h, dtype=complex)]
    for g in gens:
        seed.append(g)
        seed.append(g.conj().T)
    span = _complex_span_basis(seed)
    cap = dim_h ** 4
    for _ in range(cap):
        mats = [row.reshape(dim_h, dim_h) for row in span]
        products = [a @ b for a in mats for b in mats]
        new_span = _complex_span_basis(mats + products)
        if new_span.shape[0] == span.shape[0]:
            span = new_span
            break
        span = new_span
    else:
        raise ClosureNotReached(f"span kept growing after {cap} rounds")

    sa_candidates = []
    for row in span:
        m = row.reshape(dim_h, dim_h)
        sa_candidates.append(hermitian_part(m))
        sa_candidates.append(skew_part(m))
    basis = _gram_schmidt_hermitian(sa_candidates)
    return build(dim_h, REAL_SA, basis)


@lru_cache(maxsize=32)
def full_system(dim_h: int) -> OperatorSystem:
    """The full system (B(H))_sa with its canonical Hermitian basis.

    Basis order: diagonal units, then symmetric and antisymmetric pairs in
    lexicographic (i, j) order.  Treat the cached instance as immutable.
    """
    gens = [matrix_unit(dim_h, i, i) for i in range(dim_h)]
    for i in range(dim_h):
        for j in range(i + 1, dim_h):
            gens.append(matrix_unit(dim_h, i, j) + matrix_unit(dim_h, j, i))
            gens.append(1j * (matrix_unit(dim_h, i, j) - matrix_unit(dim_h, j, i)))
    return build(dim_h, REAL_SA, gens)

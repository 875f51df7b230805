"""Linear maps from operator systems into a matrix algebra B(K).

A map is stored by its images on the domain's orthonormal Hermitian basis;
evaluation extends complex-linearly through the Hermitian decomposition.
The Choi matrix convention is fixed by the pairing

    Tr(C (a (x) b)) = Tr(phi(a) b^T)   for all a, b,

which makes C the full transpose of the column-stacking Choi matrix; both
spectra and (block-)positivity are unchanged by the full transpose.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import opsys
from .errors import (
    DimensionMismatch,
    DomainNotFull,
    NonHermitianInput,
    NotInDomain,
    NotInProductSpan,
    NotPositiveAtIdentity,
    ZeroMap,
)
from .linalg import (
    HERM_TOL,
    as_matrix,
    frob_norm,
    herm_defect,
    hermitian_part,
    matrix_unit,
    operator_norm,
    require_hermitian,
    skew_part,
)

RANGE_CUTOFF = 1e-9


@dataclass
class LinearMap:
    """Map of an operator system into B(K), one image per basis element."""

    domain: opsys.OperatorSystem
    dim_k: int
    images: list[np.ndarray]

    def __post_init__(self):
        if len(self.images) != self.domain.sa_dim:
            raise DimensionMismatch(
                f"{len(self.images)} images for a basis of size {self.domain.sa_dim}"
            )
        fixed = []
        for img in self.images:
            img = as_matrix(img)
            if img.shape != (self.dim_k, self.dim_k):
                raise DimensionMismatch(f"image shape {img.shape} != {(self.dim_k, self.dim_k)}")
            if herm_defect(img) > HERM_TOL:
                raise NonHermitianInput(
                    f"image has Hermitian defect {herm_defect(img):.3e}"
                )
            fixed.append(hermitian_part(img))
        self.images = fixed
        self.image_stack = np.stack(fixed)

    @property
    def dim_h(self) -> int:
        return self.domain.dim

    def apply_coords(self, coords: np.ndarray) -> np.ndarray:
        return np.tensordot(coords, self.image_stack, axes=1)

    def apply(self, a: np.ndarray, tol: float = 1e-8) -> np.ndarray:
        """Evaluate at a, which must lie in the (complexified) domain."""
        a = as_matrix(a)
        if not self.domain.contains(a, tol):
            raise NotInDomain("argument is not in the domain span")
        h, s = hermitian_part(a), skew_part(a)
        out = self.apply_coords(self.domain.coords(h)).astype(complex)
        if frob_norm(s) > 0:
            out = out + 1j * self.apply_coords(self.domain.coords(s))
        return out

    def unit_image(self) -> np.ndarray:
        """Image of the identity."""
        return self.apply_coords(self.domain.coords(np.eye(self.dim_h, dtype=complex)))


def identity_map(system: opsys.OperatorSystem) -> LinearMap:
    """The inclusion of the system into B(H)."""
    return LinearMap(domain=system, dim_k=system.dim, images=[b.copy() for b in system.ortho_basis])


def full_map_from_images(dim_h: int, dim_k: int, images: list[np.ndarray]) -> LinearMap:
    return LinearMap(domain=opsys.full_system(dim_h), dim_k=dim_k, images=images)


def restrict(phi: LinearMap, system: opsys.OperatorSystem, tol: float = 1e-8) -> LinearMap:
    """Restrict a map to a subsystem of its domain."""
    images = [phi.apply(b, tol) for b in system.ortho_basis]
    return LinearMap(domain=system, dim_k=phi.dim_k, images=[hermitian_part(m) for m in images])


def matrix_unit_images(phi: LinearMap) -> np.ndarray:
    """Tensor T[i, j] = phi(e_ij) for a full-domain map, shape (dh, dh, dk, dk)."""
    if not phi.domain.is_full():
        raise DomainNotFull("matrix-unit images need the full matrix algebra as domain")
    dh = phi.dim_h
    out = np.empty((dh, dh, phi.dim_k, phi.dim_k), dtype=complex)
    for i in range(dh):
        for j in range(dh):
            e = matrix_unit(dh, i, j)
            out[i, j] = phi.apply_coords(phi.domain.coords(hermitian_part(e))).astype(complex)
            if i != j:
                out[i, j] += 1j * phi.apply_coords(phi.domain.coords(skew_part(e)))
    return out


@dataclass
class ChoiMatrix:
    """Element of B(H) (x) B(K) representing a full-domain map."""

    dim_h: int
    dim_k: int
    matrix: np.ndarray

    def __post_init__(self):
        side = self.dim_h * self.dim_k
        m = as_matrix(self.matrix)
        if m.shape != (side, side):
            raise DimensionMismatch(f"Choi matrix shape {m.shape} != {(side, side)}")
        self.matrix = require_hermitian(m)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def choi_matrix(phi: LinearMap) -> ChoiMatrix:
    """Choi matrix of a full-domain map: C = sum_ij e_ij (x) phi(e_ji)^T."""
    t = matrix_unit_images(phi)
    dh, dk = phi.dim_h, phi.dim_k
    c = np.zeros((dh * dk, dh * dk), dtype=complex)
    for i in range(dh):
        for j in range(dh):
            c[i * dk:(i + 1) * dk, j * dk:(j + 1) * dk] = t[j, i].T
    return ChoiMatrix(dim_h=dh, dim_k=dk, matrix=c)


def map_from_choi(c: ChoiMatrix) -> LinearMap:
    """Inverse of choi_matrix; returns a map on the full algebra."""
    dh, dk = c.dim_h, c.dim_k
    blocks = c.matrix.reshape(dh, dk, dh, dk)
    system = opsys.full_system(dh)
    images = []
    for b in system.ortho_basis:
        # phi(e_ij) = (block_{ji})^T, extended linearly
        img = np.einsum("ij,jnim->mn", b, blocks)
        images.append(hermitian_part(img))
    return LinearMap(domain=system, dim_k=dk, images=images)


def choi_from_matrix(m: np.ndarray, dim_h: int, dim_k: int) -> ChoiMatrix:
    return ChoiMatrix(dim_h=dim_h, dim_k=dim_k, matrix=m)


def product_span_decompose(system: opsys.OperatorSystem, dim_k: int, x: np.ndarray):
    """Expand x over {B_i (x) e_kl}: returns (Y, residual) with x ~ sum_i B_i (x) Y_i."""
    side = system.dim * dim_k
    x = as_matrix(x)
    if x.shape != (side, side):
        raise DimensionMismatch(f"element shape {x.shape} != {(side, side)}")
    xr = x.reshape(system.dim, dim_k, system.dim, dim_k)
    y = np.einsum("kpq,pmqn->kmn", system.basis_stack.conj(), xr)
    recon = np.einsum("kpq,kmn->pmqn", system.basis_stack, y).reshape(side, side)
    return y, float(np.linalg.norm(x - recon))


def dual_functional(phi: LinearMap, x: np.ndarray, tol: float = 1e-8) -> complex:
    """Value of the dual functional at x, defined by a (x) b -> Tr(phi(a) b^T).

    x must lie in the span of domain-basis (x) matrix-unit products; for a
    full-domain map this agrees with Tr(C_phi x).
    """
    y, resid = product_span_decompose(phi.domain, phi.dim_k, x)
    if resid > tol * max(1.0, frob_norm(x)):
        raise NotInProductSpan(f"residual {resid:.3e} outside the product span")
    total = 0.0 + 0.0j
    for img, yk in zip(phi.images, y):
        total += np.trace(img @ yk.T)
    return complex(total)


@dataclass
class UnitalizationRecord:
    """Data needed to move extensions across the unital reduction.

    range_isometry has the kept eigenvectors of phi(1) as columns; scaling
    is the inverse square root of phi(1) on its range.
    """

    range_projection: np.ndarray
    range_isometry: np.ndarray
    scaling: np.ndarray
    kept_eigenvalues: np.ndarray
    compressed_dim: int

    def is_trivial(self) -> bool:
        return self.compressed_dim == self.range_projection.shape[0] and np.allclose(
            self.scaling, np.eye(self.compressed_dim), atol=1e-12
        )


def unitalize(phi: LinearMap):
    """Compress to the range of phi(1) and conjugate by phi(1)^{-1/2}.

    Returns (unital map, record).  The record transports any extension of
    the unital map back to an extension of phi via transport_extension.
    """
    phi1 = phi.unit_image()
    w, u = np.linalg.eigh(phi1)
    if w[0] < -HERM_TOL:
        raise NotPositiveAtIdentity(f"phi(1) has eigenvalue {w[0]:.3e}")
    keep = w > RANGE_CUTOFF
    if not np.any(keep):
        raise ZeroMap("phi(1) vanishes")
    dk = phi.dim_k
    if np.abs(phi1 - np.eye(dk)).max() <= HERM_TOL:
        record = UnitalizationRecord(
            range_projection=np.eye(dk, dtype=complex),
            range_isometry=np.eye(dk, dtype=complex),
            scaling=np.eye(dk, dtype=complex),
            kept_eigenvalues=np.ones(dk),
            compressed_dim=dk,
        )
        return phi, record

    lam = w[keep]
    iso = u[:, keep]
    scaling = (iso * (1.0 / np.sqrt(lam))) @ iso.conj().T
    wmat = iso * (1.0 / np.sqrt(lam))
    images = [hermitian_part(wmat.conj().T @ img @ wmat) for img in phi.images]
    unital = LinearMap(domain=phi.domain, dim_k=int(keep.sum()), images=images)
    record = UnitalizationRecord(
        range_projection=iso @ iso.conj().T,
        range_isometry=iso,
        scaling=scaling,
        kept_eigenvalues=lam,
        compressed_dim=int(keep.sum()),
    )
    return unital, record


def transport_extension(record: UnitalizationRecord, psi: LinearMap) -> LinearMap:
    """Conjugate an extension of the unital map back to the original codomain."""
    m = record.range_isometry * np.sqrt(record.kept_eigenvalues)
    images = [hermitian_part(m @ img @ m.conj().T) for img in psi.images]
    return LinearMap(domain=psi.domain, dim_k=record.range_projection.shape[0], images=images)


@dataclass
class ViolationWitness:
    """PSD domain element whose image has a negative eigenvalue."""

    witness: np.ndarray
    lambda_min: float


@dataclass
class NoViolationFound:
    samples_used: int


def _boundary_element(system: opsys.OperatorSystem, coords: np.ndarray) -> np.ndarray | None:
    """Coordinates -> PSD boundary element of the system, operator norm 1."""
    a = system.combine(coords)
    lam = float(np.linalg.eigvalsh(a)[0])
    a = a - lam * np.eye(system.dim)
    norm = operator_norm(a)
    if norm < 1e-12:
        return None
    return a / norm


def check_positive(phi: LinearMap, budget: int, rng_seed: int, refine_restarts: int = 64):
    """Semi-decide positivity: sampled PSD inputs plus boundary refinement.

    Returns a ViolationWitness (PSD element of the domain whose image has
    an eigenvalue below -1e-8) or NoViolationFound with the sample count.
    """
    threshold = -1e-8
    seq = np.random.SeedSequence(rng_seed)
    sample_seed, refine_seed = seq.spawn(2)
    sample_rng = np.random.default_rng(sample_seed)
    system = phi.domain

    for _ in range(budget):
        a = system.sample_psd_element(int(sample_rng.integers(2 ** 63)))
        lam = float(np.linalg.eigvalsh(phi.apply_coords(system.coords(a)))[0])
        if lam < threshold:
            return ViolationWitness(witness=a, lambda_min=lam)

    # coordinate descent on lambda_min(phi(a)) over the PSD boundary of A
    refine_rng = np.random.default_rng(refine_seed)

    def objective(coords):
        a = _boundary_element(system, coords)
        if a is None:
            return np.inf, None
        lam = float(np.linalg.eigvalsh(phi.apply_coords(system.coords(a)))[0])
        return lam, a

    best = (np.inf, None)
    for _ in range(refine_restarts):
        coords = refine_rng.standard_normal(system.sa_dim)
        value, a = objective(coords)
        step = 0.5
        while step > 1e-6:
            improved = False
            for k in range(system.sa_dim):
                for sign in (1.0, -1.0):
                    trial = coords.copy()
                    trial[k] += sign * step
                    tval, ta = objective(trial)
                    if tval < value - 1e-15:
                        coords, value, a = trial, tval, ta
                        improved = True
            if not improved:
                step *= 0.5
        if value < best[0]:
            best = (value, a)
        if best[0] < threshold:
            return ViolationWitness(witness=best[1], lambda_min=best[0])
    return NoViolationFound(samples_used=budget + refine_restarts)


def _norm_ratio(phi: LinearMap, a: np.ndarray) -> float:
    na = operator_norm(a)
    if na < 1e-14:
        return -np.inf
    h, s = hermitian_part(a), skew_part(a)
    img = phi.apply_coords(phi.domain.coords(h)).astype(complex)
    img = img + 1j * phi.apply_coords(phi.domain.coords(s))
    return operator_norm(img) / na


def _line_search(f, x: np.ndarray, direction: np.ndarray, f0: float):
    """Maximize f(x + t*direction) over t by bracketing + golden refinement."""
    t, best_t, best_f = 1.0, 0.0, f0
    # expand
    grow = 0.0
    for _ in range(40):
        for s in (t, -t):
            v = f(x + s * direction)
            if v > best_f + 1e-16:
                best_f, best_t = v, s
        if best_t != grow:
            grow = best_t
            t *= 2.0
        else:
            break
    # refine around best_t
    lo, hi = best_t - t, best_t + t
    for _ in range(60):
        m1 = lo + 0.382 * (hi - lo)
        m2 = lo + 0.618 * (hi - lo)
        f1, f2 = f(x + m1 * direction), f(x + m2 * direction)
        if f1 > f2:
            hi = m2
            if f1 > best_f:
                best_f, best_t = f1, m1
        else:
            lo = m1
            if f2 > best_f:
                best_f, best_t = f2, m2
        if hi - lo < 1e-10 * (1.0 + abs(best_t)):
            break
    return best_t, best_f


def restricted_norm(phi: LinearMap, restarts: int, rng_seed: int):
    """Lower bound on ||phi|| over the domain span, with a witness.

    Multistart coordinate-wise ascent on the HS coordinates of the ratio
    ||phi(a)|| / ||a||; for complex-flavor domains the search runs over the
    complex span (real and imaginary coordinates), otherwise over the
    self-adjoint span.  The returned value is certified by the witness.
    """
    system = phi.domain
    m = system.sa_dim
    complex_span = system.flavor == opsys.COMPLEX
    nparams = 2 * m if complex_span else m

    def to_matrix(params):
        if complex_span:
            return system.combine(params[:m]) + 1j * system.combine(params[m:])
        return system.combine(params)

    def f(params):
        return _norm_ratio(phi, to_matrix(params))

    starts = [system.coords(np.eye(system.dim, dtype=complex))]
    for k in range(m):
        e = np.zeros(m)
        e[k] = 1.0
        starts.append(e)
    if complex_span:
        starts = [np.concatenate([s, np.zeros(m)]) for s in starts]
    rng = np.random.default_rng(rng_seed)
    for _ in range(restarts):
        starts.append(rng.standard_normal(nparams))

    best_val, best_witness = -np.inf, None
    units = np.eye(nparams)
    for x0 in starts:
        x = x0.astype(float).copy()
        val = f(x)
        if not np.isfinite(val):
            continue
        for _ in range(200):
            prev = val
            for k in range(nparams):
                t, v = _line_search(f, x, units[k], val)
                if v > val:
                    x = x + t * units[k]
                    val = v
            if val - prev <= 1e-10 * max(1.0, abs(val)):
                break
        if val > best_val:
            best_val, best_witness = val, to_matrix(x)
    scale = operator_norm(best_witness)
    return float(best_val), best_witness / scale

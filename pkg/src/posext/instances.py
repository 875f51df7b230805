"""Reproducible test instances: operator systems paired with linear maps.

The z family lives on the diagonal system spanned by 1, z, z* with z the
diagonal of the n-th roots of unity, mapped into 2x2 matrices; the scaled
variant uses the factor 2 cos(pi/n) that keeps the map positive, the
unscaled variant the factor 2 that breaks positivity while keeping the
same domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import opsys
from .errors import InvalidSpec
from .linalg import hermitian_part, matrix_unit, random_hermitian
from .maps import LinearMap, identity_map, restrict

SYSTEM_KINDS = ("full", "diagonal", "z_system", "random")
MAP_KINDS = (
    "identity",
    "transpose",
    "reduction",
    "zmap_scaled",
    "zmap_unscaled",
    "random_cp_restriction",
    "random_positive_restriction",
)


@dataclass
class InstanceSpec:
    dim_h: int
    dim_k: int
    system_kind: str
    map_kind: str
    seed: int = 0
    system_param: int | None = None  # n for z_system, dimension for random

    def __post_init__(self):
        if self.system_kind not in SYSTEM_KINDS:
            raise InvalidSpec(f"unknown system kind {self.system_kind!r}")
        if self.map_kind not in MAP_KINDS:
            raise InvalidSpec(f"unknown map kind {self.map_kind!r}")
        if self.system_kind == "z_system":
            n = self.system_param if self.system_param is not None else self.dim_h
            if n < 3:
                raise InvalidSpec("z_system needs n >= 3")
            if n != self.dim_h:
                raise InvalidSpec("z_system dimension must equal dim_h")
        if self.map_kind.startswith("zmap"):
            if self.system_kind != "z_system":
                raise InvalidSpec("zmap kinds require the z system")
            if self.dim_k != 2:
                raise InvalidSpec("zmap kinds require dim_k = 2")


def z_matrix(n: int) -> np.ndarray:
    return np.diag(np.exp(2j * np.pi * np.arange(n) / n))


def z_system(n: int) -> opsys.OperatorSystem:
    z = z_matrix(n)
    eye = np.eye(n, dtype=complex)
    return opsys.build(n, opsys.COMPLEX, [eye, z, z.conj().T])


def zmap(n: int, scaled: bool) -> LinearMap:
    """alpha + beta z + conj(beta) z* -> alpha 1 + c (beta E12 + conj(beta) E21)."""
    system = z_system(n)
    factor = 2.0 * np.cos(np.pi / n) if scaled else 2.0
    e12 = matrix_unit(2, 0, 1)
    e21 = matrix_unit(2, 1, 0)
    z = z_matrix(n)
    images = []
    for b in system.ortho_basis:
        alpha = np.trace(b).real / n
        beta = complex(np.sum(z.conj().T * b.T)) / n  # coefficient of z in b
        img = alpha * np.eye(2, dtype=complex) + factor * (beta * e12 + np.conj(beta) * e21)
        images.append(hermitian_part(img))
    return LinearMap(domain=system, dim_k=2, images=images)


def diagonal_system(dim_h: int) -> opsys.OperatorSystem:
    gens = [matrix_unit(dim_h, i, i) for i in range(dim_h)]
    return opsys.build(dim_h, opsys.REAL_SA, gens)


def random_system(dim_h: int, sa_dim: int, rng: np.random.Generator) -> opsys.OperatorSystem:
    if not 1 <= sa_dim <= dim_h * dim_h:
        raise InvalidSpec(f"system dimension {sa_dim} out of range for dim_h {dim_h}")
    gens = [np.eye(dim_h, dtype=complex)]
    while len(gens) < sa_dim:
        gens.append(random_hermitian(rng, dim_h))
    return opsys.build(dim_h, opsys.REAL_SA, gens)


def _rect_kraus(dim_h: int, dim_k: int, rng: np.random.Generator) -> list[np.ndarray]:
    terms = int(rng.integers(1, 4))
    return [
        (rng.standard_normal((dim_k, dim_h)) + 1j * rng.standard_normal((dim_k, dim_h)))
        / np.sqrt(2.0 * dim_h)
        for _ in range(terms)
    ]


def random_cp_full_map(dim_h: int, dim_k: int, rng: np.random.Generator) -> LinearMap:
    """Random Kraus map x -> sum_r V_r x V_r* of B(H) into B(K)."""
    kraus = _rect_kraus(dim_h, dim_k, rng)
    system = opsys.full_system(dim_h)
    images = [hermitian_part(sum(v @ b @ v.conj().T for v in kraus)) for b in system.ortho_basis]
    return LinearMap(domain=system, dim_k=dim_k, images=images)


def random_positive_full_map(dim_h: int, dim_k: int, rng: np.random.Generator) -> LinearMap:
    """Random decomposable map of B(H) into B(K): positive by construction."""
    cp_kraus = _rect_kraus(dim_h, dim_k, rng)
    co_kraus = _rect_kraus(dim_h, dim_k, rng)
    w = float(rng.uniform())
    system = opsys.full_system(dim_h)
    images = []
    for b in system.ortho_basis:
        cp_term = sum(v @ b @ v.conj().T for v in cp_kraus)
        cocp_term = sum(v @ b.T @ v.conj().T for v in co_kraus)
        images.append(hermitian_part(w * cp_term + (1.0 - w) * cocp_term))
    return LinearMap(domain=system, dim_k=dim_k, images=images)


def _build_system(spec: InstanceSpec, rng: np.random.Generator) -> opsys.OperatorSystem:
    if spec.system_kind == "full":
        return opsys.full_system(spec.dim_h)
    if spec.system_kind == "diagonal":
        return diagonal_system(spec.dim_h)
    if spec.system_kind == "z_system":
        return z_system(spec.dim_h)
    sa_dim = spec.system_param if spec.system_param is not None else min(3, spec.dim_h ** 2)
    return random_system(spec.dim_h, sa_dim, rng)


def generate_instance(spec: InstanceSpec):
    """Deterministic (system, map) pair for the given specification."""
    rng = np.random.default_rng(spec.seed)
    system = _build_system(spec, rng)

    if spec.map_kind == "zmap_scaled":
        return system, zmap(spec.dim_h, scaled=True)
    if spec.map_kind == "zmap_unscaled":
        return system, zmap(spec.dim_h, scaled=False)

    if spec.map_kind == "identity":
        if spec.dim_k != spec.dim_h:
            raise InvalidSpec("identity map needs dim_k = dim_h")
        return system, identity_map(system)
    if spec.map_kind == "transpose":
        if spec.dim_k != spec.dim_h:
            raise InvalidSpec("transpose map needs dim_k = dim_h")
        images = [b.T.copy() for b in system.ortho_basis]
        return system, LinearMap(domain=system, dim_k=spec.dim_h, images=images)
    if spec.map_kind == "reduction":
        if spec.dim_k != spec.dim_h:
            raise InvalidSpec("reduction map needs dim_k = dim_h")
        eye = np.eye(spec.dim_h, dtype=complex)
        images = [np.trace(b) * eye - b for b in system.ortho_basis]
        return system, LinearMap(domain=system, dim_k=spec.dim_h, images=[hermitian_part(m) for m in images])
    if spec.map_kind == "random_cp_restriction":
        full = random_cp_full_map(spec.dim_h, spec.dim_k, rng)
        return system, restrict(full, system)
    # random_positive_restriction
    full = random_positive_full_map(spec.dim_h, spec.dim_k, rng)
    return system, restrict(full, system)

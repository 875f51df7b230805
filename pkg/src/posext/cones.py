"""Mapping cones and the sampled cone P(A, C) of jointly positive elements.

A cone descriptor names a family of positive maps of B(H) into itself and
knows how to draw random elements of it.  Membership in P(A, C) is a
semi-decision: an element is Rejected with a witness map, or NotRejected
after a budget of sampled checks.  The cone acts on the B(H) tensor factor;
the identity map is always checked first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import opsys
from .errors import NotInProductSpan
from .linalg import (
    as_matrix,
    frob_norm,
    ginibre,
    hermitian_part,
    matrix_unit,
    operator_norm,
    psd_project,
    random_psd,
)
from .maps import LinearMap, choi_matrix, full_map_from_images, map_from_choi, product_span_decompose

CONE_KINDS = ("cp", "cocp", "dec", "pos", "kpos")
REJECT_TOL = -1e-8


@dataclass
class MappingCone:
    """Descriptor of a closed convex cone of positive maps of B(H)."""

    dim_h: int
    kind: str
    k: int | None = None
    check_budget: int = 16

    def __post_init__(self):
        if self.kind not in CONE_KINDS:
            raise ValueError(f"unknown cone kind {self.kind!r}")
        if self.kind == "kpos":
            if self.k is None or self.k < 1:
                raise ValueError("kpos cone needs k >= 1")

    @property
    def label(self) -> str:
        return f"kpos:{self.k}" if self.kind == "kpos" else self.kind


def parse_cone(text: str, dim_h: int) -> MappingCone:
    """Parse a CLI cone flag: cp | cocp | dec | pos | kpos:k."""
    if text.startswith("kpos:"):
        return MappingCone(dim_h=dim_h, kind="kpos", k=int(text.split(":", 1)[1]))
    return MappingCone(dim_h=dim_h, kind=text)


def _draw_kraus(rng: np.random.Generator, dim: int) -> list[np.ndarray]:
    terms = int(rng.integers(1, 4))
    vs = [ginibre(rng, dim, dim) for _ in range(terms)]
    total = sum(v.conj().T @ v for v in vs)
    scale = np.sqrt(operator_norm(total))
    return [v / scale for v in vs]


def cp_map_from_kraus(dim_h: int, kraus: list[np.ndarray], transpose_input: bool = False) -> LinearMap:
    """Map x -> sum_r V_r* x V_r (optionally applied to x^T first)."""
    system = opsys.full_system(dim_h)
    images = []
    for b in system.ortho_basis:
        x = b.T if transpose_input else b
        images.append(hermitian_part(sum(v.conj().T @ x @ v for v in kraus)))
    return LinearMap(domain=system, dim_k=dim_h, images=images)


def _mix_maps(weight: float, a: LinearMap, b: LinearMap) -> LinearMap:
    images = [weight * x + (1.0 - weight) * y for x, y in zip(a.images, b.images)]
    return LinearMap(domain=a.domain, dim_k=a.dim_k, images=images)


def compose_full_maps(outer: LinearMap, inner: LinearMap) -> LinearMap:
    """outer o inner for full-domain maps of matching dimensions."""
    images = [outer.apply(inner.apply(b)) for b in inner.domain.ortho_basis]
    return LinearMap(domain=inner.domain, dim_k=outer.dim_k, images=[hermitian_part(m) for m in images])


def choi_map_m3() -> LinearMap:
    """The dimension-3 positive indecomposable witness map.

    x -> [[x11+x33, -x12, -x13], [-x21, x22+x11, -x23], [-x31, -x32, x33+x22]]
    """
    system = opsys.full_system(3)
    images = []
    for b in system.ortho_basis:
        d = np.diag([b[0, 0] + b[2, 2], b[1, 1] + b[0, 0], b[2, 2] + b[1, 1]])
        images.append(hermitian_part(d - (b - np.diag(np.diag(b))) ))
    return LinearMap(domain=system, dim_k=3, images=images)


def map_tensor(alpha: LinearMap) -> np.ndarray:
    """Action tensor T[p, q, i, j] = alpha(e_ij)[p, q] of a full-domain map."""
    from .maps import matrix_unit_images

    t = matrix_unit_images(alpha)  # (i, j, p, q)
    return np.transpose(t, (2, 3, 0, 1))


def apply_on_left_factor(tensor: np.ndarray, x: np.ndarray, dim_h: int, dim_k: int) -> np.ndarray:
    """(alpha (x) id)(x) for x on H (x) K, alpha given by its action tensor."""
    xr = np.asarray(x, dtype=complex).reshape(dim_h, dim_k, dim_h, dim_k)
    out = np.einsum("pqij,imjn->pmqn", tensor, xr)
    return out.reshape(dim_h * dim_k, dim_h * dim_k)


def apply_on_right_factor(tensor: np.ndarray, x: np.ndarray, dim_left: int, dim_h: int) -> np.ndarray:
    """(id (x) alpha)(x) for x on C^m (x) H."""
    xr = np.asarray(x, dtype=complex).reshape(dim_left, dim_h, dim_left, dim_h)
    out = np.einsum("pqij,aibj->apbq", tensor, xr)
    return out.reshape(dim_left * dim_h, dim_left * dim_h)


def _kpos_spot_check(alpha: LinearMap, k: int, rng: np.random.Generator, trials: int = 50) -> bool:
    """Sampled k-positivity: (id_k (x) alpha) keeps random PSD inputs PSD."""
    tensor = map_tensor(alpha)
    dim = k * alpha.dim_h
    for t in range(trials):
        rank = 1 if t % 2 == 0 else None
        rho = random_psd(rng, dim, rank=rank)
        out = apply_on_right_factor(tensor, rho, k, alpha.dim_h)
        if float(np.linalg.eigvalsh(hermitian_part(out))[0]) < -1e-10:
            return False
    return True


def sample_cone_element(cone: MappingCone, rng_seed: int) -> LinearMap:
    """Draw a random element of the cone, as a map of B(H) into itself."""
    rng = np.random.default_rng(rng_seed)
    dh = cone.dim_h
    if cone.kind == "cp":
        return cp_map_from_kraus(dh, _draw_kraus(rng, dh))
    if cone.kind == "cocp":
        return cp_map_from_kraus(dh, _draw_kraus(rng, dh), transpose_input=True)
    if cone.kind == "dec":
        w = float(rng.uniform())
        return _mix_maps(
            w,
            cp_map_from_kraus(dh, _draw_kraus(rng, dh)),
            cp_map_from_kraus(dh, _draw_kraus(rng, dh), transpose_input=True),
        )
    if cone.kind == "pos":
        use_witness = dh == 3 and rng.uniform() < 0.25
        w = float(rng.uniform())
        base = _mix_maps(
            w,
            cp_map_from_kraus(dh, _draw_kraus(rng, dh)),
            cp_map_from_kraus(dh, _draw_kraus(rng, dh), transpose_input=True),
        )
        if not use_witness:
            return base
        witness = choi_map_m3()
        if rng.uniform() < 0.5:
            return witness
        pre = cp_map_from_kraus(dh, _draw_kraus(rng, dh))
        post = cp_map_from_kraus(dh, _draw_kraus(rng, dh))
        return compose_full_maps(post, compose_full_maps(witness, pre))
    # kpos: perturb a CP Choi matrix, keep only spot-checked draws
    k = int(cone.k)
    cp = cp_map_from_kraus(dh, _draw_kraus(rng, dh))
    if k >= dh:
        return cp  # k-positive = completely positive at full k
    c0 = choi_matrix(cp).matrix
    top = float(np.linalg.eigvalsh(c0)[-1])
    for _ in range(20):
        noise = hermitian_part(ginibre(rng, dh * dh, dh * dh))
        noise = noise / max(operator_norm(noise), 1e-12)
        eps = float(rng.uniform(0.0, top / (2.0 * k)))
        candidate = map_from_choi_square(c0 + eps * noise, dh)
        if _kpos_spot_check(candidate, k, rng):
            return candidate
    return cp


def map_from_choi_square(c: np.ndarray, dim_h: int) -> LinearMap:
    from .maps import ChoiMatrix, map_from_choi as _mfc

    return _mfc(ChoiMatrix(dim_h=dim_h, dim_k=dim_h, matrix=hermitian_part(c)))


@dataclass
class Rejected:
    """Witness verdict: the indexed sampled map exposes a negative output."""

    alpha_index: int
    alpha: LinearMap
    lambda_min: float


@dataclass
class NotRejected:
    checks: int


@dataclass
class PacSample:
    """Survivor of the sampled P(A, C) membership filter."""

    element: np.ndarray
    checks_passed: int


def _cone_seeds(rng_seed: int):
    """Deterministic seed stream; a shorter prefix is always reproduced."""
    rng = np.random.default_rng(rng_seed)
    while True:
        yield int(rng.integers(2 ** 63))


def membership_pac(
    x: np.ndarray,
    system: opsys.OperatorSystem,
    cone: MappingCone,
    budget: int,
    rng_seed: int,
):
    """Sampled membership test of x in P(A, C).

    The identity map is checked first; then `budget` cone samples.  For a
    fixed seed the sample sequence for a smaller budget is a prefix of the
    one for a larger budget, so enlarging the budget never un-rejects.
    """
    x = as_matrix(x)
    dim_k = x.shape[0] // max(system.dim, 1)
    _, resid = product_span_decompose(system, dim_k, hermitian_part(x))
    if resid > 1e-8 * max(1.0, frob_norm(x)):
        raise NotInProductSpan(f"residual {resid:.3e} outside the product span of A and B(K)")
    x = hermitian_part(x)

    lam = float(np.linalg.eigvalsh(x)[0])
    if lam < REJECT_TOL:
        from .maps import identity_map

        return Rejected(alpha_index=0, alpha=identity_map(opsys.full_system(system.dim)), lambda_min=lam)

    seeds = _cone_seeds(rng_seed)
    for idx in range(budget):
        alpha = sample_cone_element(cone, next(seeds))
        out = apply_on_left_factor(map_tensor(alpha), x, system.dim, dim_k)
        lam = float(np.linalg.eigvalsh(hermitian_part(out))[0])
        if lam < REJECT_TOL:
            return Rejected(alpha_index=idx + 1, alpha=alpha, lambda_min=lam)
    return NotRejected(checks=budget + 1)


def _partial_transpose_left(x: np.ndarray, dim_h: int, dim_k: int) -> np.ndarray:
    xr = x.reshape(dim_h, dim_k, dim_h, dim_k)
    return xr.transpose(2, 1, 0, 3).reshape(dim_h * dim_k, dim_h * dim_k)


def _repair_candidate(
    x: np.ndarray,
    system: opsys.OperatorSystem,
    dim_k: int,
    cone: MappingCone,
    rounds: int = 8,
) -> np.ndarray:
    """Push a raw Hermitian draw toward P(A, C) before the membership filter."""
    use_ppt = cone.kind in ("cocp", "dec", "pos")

    def span_project(m):
        y, _ = product_span_decompose(system, dim_k, m)
        side = system.dim * dim_k
        return np.einsum("kpq,kmn->pmqn", system.basis_stack, y).reshape(side, side)

    for _ in range(rounds):
        x = psd_project(hermitian_part(x))
        if use_ppt:
            pt = _partial_transpose_left(x, system.dim, dim_k)
            x = _partial_transpose_left(psd_project(hermitian_part(pt)), system.dim, dim_k)
        x = hermitian_part(span_project(x))
    return x


def sample_pac(
    system: opsys.OperatorSystem,
    dim_k: int,
    cone: MappingCone,
    budget: int,
    rng_seed: int,
) -> list[PacSample]:
    """Random elements of P(A, C): 1 (x) 1 first, then filtered random draws."""
    side = system.dim * dim_k
    samples: list[PacSample] = []
    seq = np.random.SeedSequence(rng_seed)
    draw_seed, filter_seed = seq.spawn(2)
    rng = np.random.default_rng(draw_seed)
    filter_seeds = _cone_seeds(int(np.random.default_rng(filter_seed).integers(2 ** 63)))

    eye = np.eye(side, dtype=complex)
    verdict = membership_pac(eye, system, cone, cone.check_budget, next(filter_seeds))
    assert isinstance(verdict, NotRejected)
    samples.append(PacSample(element=eye, checks_passed=verdict.checks))

    basis = system.basis_stack
    kunits = np.stack(opsys.full_system(dim_k).ortho_basis)
    for t in range(budget):
        style = t % 3
        coords = rng.standard_normal((basis.shape[0], kunits.shape[0]))
        raw = np.einsum("ab,aij,bmn->imjn", coords, basis, kunits).reshape(side, side)
        if style == 1:
            shift = rng.uniform(0.0, 1.0) * float(np.linalg.eigvalsh(raw)[-1])
            raw = raw - shift * eye
        elif style == 2:
            v = ginibre(rng, side, 1)
            raw = (v @ v.conj().T) * float(rng.uniform(0.5, 2.0))
        cand = _repair_candidate(raw, system, dim_k, cone)
        if frob_norm(cand) < 1e-10:
            continue
        try:
            verdict = membership_pac(cand, system, cone, cone.check_budget, next(filter_seeds))
        except NotInProductSpan:
            continue
        if isinstance(verdict, NotRejected):
            samples.append(PacSample(element=cand, checks_passed=verdict.checks))
    return samples


@dataclass
class Violation:
    """Element of the sampled cone with a negative dual-functional value."""

    element: np.ndarray
    value: float


@dataclass
class NoViolationFound:
    samples: int


def check_c_positive(phi: LinearMap, cone: MappingCone, budget: int, rng_seed: int):
    """Semi-decide C-positivity: dual functional on sampled P(A, C) elements."""
    from .maps import dual_functional

    samples = sample_pac(phi.domain, phi.dim_k, cone, budget, rng_seed)
    for s in samples:
        value = dual_functional(phi, s.element).real
        if value < REJECT_TOL:
            return Violation(element=s.element, value=float(value))
    return NoViolationFound(samples=len(samples))

"""Extension procedures: convex feasibility over Choi candidates, the
completely positive case, the norm criterion with constructive search for
a block-positive extension, and cone-constrained extension from sampled
half-spaces.

Non-existence has one rigorous channel (a norm witness above 1); failed
searches are reported as failures, never as proofs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import opsys
from .cones import MappingCone, NoViolationFound as ConeNoViolation, Violation as ConeViolation, check_c_positive, sample_pac
from .errors import (
    BadCompositeDimension,
    InconsistentAffine,
    NotPositiveOnDomain,
)
from .linalg import (
    as_matrix,
    frob_norm,
    hermitian_part,
    kron,
    psd_project,
    require_hermitian,
)
from .maps import (
    ChoiMatrix,
    LinearMap,
    ViolationWitness,
    check_positive,
    map_from_choi,
    restricted_norm,
    unitalize,
)

CRITERION_THRESHOLD = 1.0 + 1e-6
CERT_TOL = -1e-8


def herm_to_vec(x: np.ndarray) -> np.ndarray:
    """Isometry from Hermitian matrices to real coordinate vectors."""
    n = x.shape[0]
    iu = np.triu_indices(n, k=1)
    upper = x[iu] * np.sqrt(2.0)
    return np.concatenate([np.diag(x).real, upper.real, upper.imag])


def vec_to_herm(v: np.ndarray, n: int) -> np.ndarray:
    iu = np.triu_indices(n, k=1)
    k = iu[0].size
    x = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(x, v[:n])
    upper = (v[n:n + k] + 1j * v[n + k:]) / np.sqrt(2.0)
    x[iu] = upper
    x[(iu[1], iu[0])] = upper.conj()
    return x


@dataclass
class FeasibilityProblem:
    """Affine constraints Re Tr(F_i X) = t_i intersected with a cone.

    cone is either the string "psd" or a list of Hermitian matrices G_j,
    each read as the half-space Re Tr(G_j X) >= 0.
    """

    ambient_dim: int
    affine_constraints: list[tuple[np.ndarray, float]]
    cone: object = "psd"
    max_iterations: int = 100000
    residual_tolerance: float = 1e-10

    def __post_init__(self):
        fixed = []
        for f, t in self.affine_constraints:
            fixed.append((require_hermitian(as_matrix(f)), float(t)))
        self.affine_constraints = fixed
        if self.cone != "psd":
            self.cone = [require_hermitian(as_matrix(g)) for g in self.cone]


@dataclass
class SolveResult:
    status: str  # feasible | infeasible | max_iterations
    x: np.ndarray
    residuals: dict
    iterations: int
    stall_distance: float | None = None


class _AffineProjector:
    def __init__(self, problem: FeasibilityProblem):
        n = problem.ambient_dim
        self.n = n
        if problem.affine_constraints:
            self.a = np.stack([herm_to_vec(f) for f, _ in problem.affine_constraints])
            self.t = np.array([t for _, t in problem.affine_constraints])
        else:
            self.a = np.zeros((0, n * n))
            self.t = np.zeros(0)
        self.pinv = np.linalg.pinv(self.a) if self.a.size else self.a.T
        base = self.pinv @ self.t
        if self.a.size and np.abs(self.a @ base - self.t).max(initial=0.0) > 1e-8:
            raise InconsistentAffine(
                f"least-squares residual {np.abs(self.a @ base - self.t).max():.3e} > 1e-8"
            )
        self.base = base

    def project(self, c: np.ndarray) -> np.ndarray:
        if not self.a.size:
            return c
        return c - self.pinv @ (self.a @ c - self.t)

    def residual(self, c: np.ndarray) -> float:
        if not self.a.size:
            return 0.0
        return float(np.abs(self.a @ c - self.t).max())

    def null_basis(self) -> np.ndarray:
        """Columns span the null space of the constraint matrix."""
        d = self.n * self.n
        if not self.a.size:
            return np.eye(d)
        u, s, vt = np.linalg.svd(self.a, full_matrices=True)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
        return vt[rank:].T


def dykstra_solve(problem: FeasibilityProblem, rng_seed: int = 0) -> SolveResult:
    """Dykstra's alternating projections between the affine set and the cone.

    Stops when successive iterates move less than residual_tolerance.
    Infeasibility is reported as a stall: the distance between the two
    projection sets stops decreasing (relative change below 1e-12 over a
    500-iteration window) while staying above the noise floor; one seeded
    restart confirms the stall before it is reported.
    """
    n = problem.ambient_dim
    proj_affine = _AffineProjector(problem)
    psd_mode = problem.cone == "psd"
    if psd_mode:
        halfspaces = []
    else:
        halfspaces = [herm_to_vec(g) for g in problem.cone]
        halfspaces = [(g, float(g @ g)) for g in halfspaces]

    def cone_residual(c: np.ndarray) -> float:
        if psd_mode:
            lam = float(np.linalg.eigvalsh(vec_to_herm(c, n))[0])
            return max(0.0, -lam)
        worst = 0.0
        for g, g2 in halfspaces:
            worst = max(worst, -min(float(g @ c), 0.0))
        return worst

    rng = np.random.default_rng(rng_seed)
    stall_floor = max(100.0 * problem.residual_tolerance, 1e-8)
    window = 500
    restarted = False
    stall_seen = None

    c = proj_affine.base.copy()
    increments = [np.zeros(n * n)] if psd_mode else [np.zeros(n * n) for _ in halfspaces]
    dist_hist: list[float] = []
    iterations = 0

    while iterations < problem.max_iterations:
        iterations += 1
        y = proj_affine.project(c)
        cur = y
        if psd_mode:
            z_in = cur + increments[0]
            z = herm_to_vec(psd_project(vec_to_herm(z_in, n)))
            increments[0] = z_in - z
            cur = z
        else:
            for j, (g, g2) in enumerate(halfspaces):
                z_in = cur + increments[j]
                margin = float(g @ z_in)
                z = z_in if margin >= 0.0 else z_in - (margin / g2) * g
                increments[j] = z_in - z
                cur = z
        dist = float(np.linalg.norm(y - cur))
        delta = float(np.linalg.norm(cur - c))
        c = cur
        if delta < problem.residual_tolerance:
            break
        dist_hist.append(dist)
        if len(dist_hist) >= window:
            recent = dist_hist[-window:]
            spread = max(recent) - min(recent)
            level = max(recent)
            if level > stall_floor and spread <= 1e-12 * max(1.0, level):
                if not restarted:
                    restarted = True
                    stall_seen = level
                    jitter = rng.standard_normal(n * n) * level
                    c = proj_affine.project(proj_affine.base + jitter)
                    increments = [np.zeros(n * n) for _ in increments]
                    dist_hist = []
                    continue
                return SolveResult(
                    status="infeasible",
                    x=vec_to_herm(proj_affine.project(c), n),
                    residuals={"affine": proj_affine.residual(c), "cone": cone_residual(c)},
                    iterations=iterations,
                    stall_distance=max(level, stall_seen or 0.0),
                )

    residuals = {"affine": proj_affine.residual(c), "cone": cone_residual(c)}
    ok = residuals["affine"] < 1e-8 and residuals["cone"] < 1e-8
    status = "feasible" if ok and iterations < problem.max_iterations else "max_iterations"
    return SolveResult(
        status=status,
        x=vec_to_herm(c, n),
        residuals=residuals,
        iterations=iterations,
    )


@dataclass
class ExtensionResult:
    """Outcome of an extension attempt, with its certificate scalars."""

    status: str  # feasible | infeasible | max_iterations
    extension: LinearMap | None
    certificate: dict
    agreement_error: float | None
    stall_distance: float | None = None
    iterations: int = 0


def agreement_constraints(phi: LinearMap) -> list[tuple[np.ndarray, float]]:
    """Affine constraints forcing a Choi candidate to agree with phi on A."""
    kbasis = opsys.full_system(phi.dim_k).ortho_basis
    constraints = []
    for a, img in zip(phi.domain.ortho_basis, phi.images):
        for b in kbasis:
            constraints.append((kron(a, b), float(np.trace(img @ b.T).real)))
    return constraints


def _agreement_error(phi: LinearMap, psi: LinearMap) -> float:
    worst = 0.0
    for a, img in zip(phi.domain.ortho_basis, phi.images):
        worst = max(worst, frob_norm(psi.apply(a) - img))
    return worst


def extend_cp(phi: LinearMap, rng_seed: int = 0, max_iterations: int = 100000) -> ExtensionResult:
    """Completely positive extension via PSD feasibility on the Choi fiber."""
    side = phi.dim_h * phi.dim_k
    problem = FeasibilityProblem(
        ambient_dim=side,
        affine_constraints=agreement_constraints(phi),
        cone="psd",
        max_iterations=max_iterations,
    )
    res = dykstra_solve(problem, rng_seed)
    if res.status != "feasible":
        return ExtensionResult(
            status=res.status,
            extension=None,
            certificate={"residuals": res.residuals},
            agreement_error=None,
            stall_distance=res.stall_distance,
            iterations=res.iterations,
        )
    x = psd_project(res.x)
    psi = map_from_choi(ChoiMatrix(dim_h=phi.dim_h, dim_k=phi.dim_k, matrix=x))
    agreement = _agreement_error(phi, psi)
    lam = float(np.linalg.eigvalsh(x)[0])
    status = "feasible" if agreement < 1e-8 and lam > CERT_TOL else "max_iterations"
    return ExtensionResult(
        status=status,
        extension=psi,
        certificate={"choi_min_eigenvalue": lam},
        agreement_error=agreement,
        iterations=res.iterations,
    )


def min_product_state_value(
    c: np.ndarray,
    dim_h: int,
    dim_k: int,
    restarts: int = 16,
    rng_seed: int = 0,
    extra_starts: list | None = None,
):
    """Smallest found value of <xi (x) eta, C xi (x) eta> over unit vectors.

    Alternating minimization: contracting on one factor leaves a Hermitian
    matrix whose bottom eigenvector updates the other factor.  The result
    is an upper bound on the true minimum over product states.
    """
    c = require_hermitian(as_matrix(c))
    if c.shape[0] != dim_h * dim_k:
        raise BadCompositeDimension(f"side {c.shape[0]} != {dim_h} * {dim_k}")
    cr = c.reshape(dim_h, dim_k, dim_h, dim_k)

    def eta_matrix(xi):
        return np.einsum("p,pmqn,q->mn", xi.conj(), cr, xi)

    def xi_matrix(eta):
        return np.einsum("m,pmqn,n->pq", eta.conj(), cr, eta)

    def refine(xi):
        xi = xi / np.linalg.norm(xi)
        value = np.inf
        eta = None
        for _ in range(200):
            w, u = np.linalg.eigh(hermitian_part(eta_matrix(xi)))
            eta = u[:, 0]
            w2, u2 = np.linalg.eigh(hermitian_part(xi_matrix(eta)))
            xi = u2[:, 0]
            new_value = float(w2[0])
            if abs(new_value - value) < 1e-12 * (1.0 + abs(new_value)):
                value = new_value
                break
            value = new_value
        return value, xi, eta

    rng = np.random.default_rng(rng_seed)
    starts = [np.eye(dim_h, dtype=complex)[:, i] for i in range(dim_h)]
    for _ in range(restarts):
        v = rng.standard_normal(dim_h) + 1j * rng.standard_normal(dim_h)
        starts.append(v)
    if extra_starts:
        starts = list(extra_starts) + starts

    best = (np.inf, None, None)
    for xi0 in starts:
        value, xi, eta = refine(np.asarray(xi0, dtype=complex))
        if value < best[0]:
            best = (value, xi, eta)
    return best


def extend_positive(
    phi: LinearMap,
    restarts: int = 64,
    rng_seed: int = 0,
    ascent_iterations: int = 150,
    inner_restarts: int = 8,
    certify_restarts: int = 64,
) -> ExtensionResult:
    """Search the agreement fiber for a block-positive Choi candidate.

    The fiber X(s) = X0 + sum_m s_m N_m is exactly affine-feasible; the
    objective v(s) = min product-state value of X(s) is pushed up by
    subgradient ascent, taking the minimizing product pair as the ascent
    direction.  Success requires the final value to survive a heavier
    certification pass.
    """
    side = phi.dim_h * phi.dim_k
    problem = FeasibilityProblem(
        ambient_dim=side, affine_constraints=agreement_constraints(phi), cone="psd"
    )
    proj = _AffineProjector(problem)
    null = proj.null_basis()
    nullity = null.shape[1]
    seq = np.random.SeedSequence(rng_seed)
    inner_seed, start_seed = (int(np.random.default_rng(s).integers(2 ** 63)) for s in seq.spawn(2))
    rng = np.random.default_rng(start_seed)

    def x_of(s):
        return vec_to_herm(proj.base + null @ s, side)

    def evaluate(s, pool, n_restarts):
        value, xi, eta = min_product_state_value(
            x_of(s), phi.dim_h, phi.dim_k,
            restarts=n_restarts, rng_seed=inner_seed, extra_starts=pool,
        )
        return value, xi, eta

    def build_result(s, value, xi, eta, iterations):
        x = x_of(s)
        psi = map_from_choi(ChoiMatrix(dim_h=phi.dim_h, dim_k=phi.dim_k, matrix=x))
        agreement = _agreement_error(phi, psi)
        feasible = value >= CERT_TOL and agreement < 1e-8
        return ExtensionResult(
            status="feasible" if feasible else "max_iterations",
            extension=psi if feasible else None,
            certificate={
                "product_state_value": float(value),
                "xi": [complex(z) for z in xi] if xi is not None else None,
                "eta": [complex(z) for z in eta] if eta is not None else None,
            },
            agreement_error=agreement if feasible else None,
            iterations=iterations,
        )

    if nullity == 0:
        s = np.zeros(0)
        value, xi, eta = evaluate(s, None, certify_restarts)
        return build_result(s, value, xi, eta, iterations=1)

    best = (-np.inf, None, None, None)  # value, s, xi, eta
    total_iters = 0
    for restart in range(max(restarts, 1)):
        s = np.zeros(nullity) if restart == 0 else rng.standard_normal(nullity) * 0.5
        pool: list[np.ndarray] = []
        value, xi, eta = evaluate(s, pool, inner_restarts)
        step = 0.5
        for _ in range(ascent_iterations):
            total_iters += 1
            if value >= CERT_TOL:
                cert_value, cxi, ceta = evaluate(s, [xi], certify_restarts)
                if cert_value >= CERT_TOL:
                    return build_result(s, cert_value, cxi, ceta, total_iters)
                value, xi, eta = cert_value, cxi, ceta
            w = np.kron(xi, eta)
            # Re <w, N_m w> = <vec(N_m), vec(w w*)> under the real isometry
            grad = null.T @ herm_to_vec(hermitian_part(np.outer(w, w.conj())))
            gnorm = np.linalg.norm(grad)
            if gnorm < 1e-14:
                break
            direction = grad / gnorm
            improved = False
            for trial in (4.0 * step, step, 0.25 * step):
                cand = s + trial * direction
                cval, cxi, ceta = evaluate(cand, [xi], inner_restarts)
                if cval > value + 1e-14:
                    s, value, xi, eta = cand, cval, cxi, ceta
                    step = trial
                    improved = True
                    break
            if not improved:
                step *= 0.25
                if step < 1e-9:
                    break
        if value > best[0]:
            best = (value, s.copy(), xi, eta)

    value, s, xi, eta = best
    cert_value, cxi, ceta = evaluate(s, [xi] if xi is not None else None, certify_restarts)
    return build_result(s, cert_value, cxi, ceta, total_iters)


@dataclass
class NoExtension:
    """Rigorous verdict: the unitalized restricted norm exceeds 1."""

    norm_lower_bound: float
    witness: np.ndarray
    record: object = None


@dataclass
class ProbablyExists:
    """Norm is consistent with 1; carries any constructed extension."""

    norm_estimate: float
    extension: LinearMap | None
    search: ExtensionResult | None = None


def extension_criterion(phi: LinearMap, restarts: int = 32, rng_seed: int = 0,
                        recheck_budget: int = 200, construct: bool = True):
    """Decide the norm criterion for a positive extension.

    The map is unitalized, the restricted norm of the unital reduction is
    bounded from below, and a bound above 1 + 1e-6 is fatal (the witness
    certifies it).  Otherwise a constructive search runs and the verdict is
    ProbablyExists regardless of its success.
    """
    seq = np.random.SeedSequence(rng_seed)
    s1, s2, s3 = (int(np.random.default_rng(s).integers(2 ** 63)) for s in seq.spawn(3))
    verdict = check_positive(phi, budget=recheck_budget, rng_seed=s1, refine_restarts=8)
    if isinstance(verdict, ViolationWitness):
        raise NotPositiveOnDomain(
            f"positivity violation with eigenvalue {verdict.lambda_min:.3e}"
        )
    unital, record = unitalize(phi)
    bound, witness = restricted_norm(unital, restarts=restarts, rng_seed=s2)
    if bound > CRITERION_THRESHOLD:
        return NoExtension(norm_lower_bound=bound, witness=witness, record=record)
    search = None
    if construct:
        search = extend_positive(phi, restarts=max(restarts // 4, 4), rng_seed=s3)
    extension = search.extension if search is not None else None
    return ProbablyExists(norm_estimate=bound, extension=extension, search=search)


def extend_c_positive(
    phi: LinearMap,
    cone: MappingCone,
    sample_budget: int = 64,
    rng_seed: int = 0,
    max_iterations: int = 100000,
    verify_budget: int = 32,
) -> ExtensionResult:
    """Cone-constrained extension from sampled half-spaces.

    Half-spaces Re Tr(X x_s) >= 0 are drawn from the cone P over the full
    system (not over A), mirroring how the agreement functional has to stay
    positive on all of P.  A found extension is re-checked by sampled
    C-positivity; a violation re-enters as a new half-space once.
    """
    if phi.domain.flavor == opsys.COMPLEX:
        sa = opsys.build(phi.dim_h, opsys.REAL_SA, phi.domain.ortho_basis)
        phi = LinearMap(domain=sa, dim_k=phi.dim_k, images=phi.images)
    side = phi.dim_h * phi.dim_k
    seq = np.random.SeedSequence(rng_seed)
    s_half, s_solve, s_verify = (int(np.random.default_rng(s).integers(2 ** 63)) for s in seq.spawn(3))
    halfspaces = []
    if sample_budget > 0:
        full = opsys.full_system(phi.dim_h)
        for s in sample_pac(full, phi.dim_k, cone, sample_budget, s_half):
            g = s.element / max(frob_norm(s.element), 1e-12)
            halfspaces.append(g)

    constraints = agreement_constraints(phi)
    res = None
    for round_ in range(3):
        problem = FeasibilityProblem(
            ambient_dim=side,
            affine_constraints=constraints,
            cone=halfspaces if halfspaces else [],
            max_iterations=max_iterations,
        )
        res = dykstra_solve(problem, s_solve + round_)
        if res.status != "feasible":
            return ExtensionResult(
                status=res.status,
                extension=None,
                certificate={"residuals": res.residuals, "cone": cone.label},
                agreement_error=None,
                stall_distance=res.stall_distance,
                iterations=res.iterations,
            )
        psi = map_from_choi(ChoiMatrix(dim_h=phi.dim_h, dim_k=phi.dim_k, matrix=res.x))
        agreement = _agreement_error(phi, psi)
        margins = [float(np.sum(g.conj() * res.x).real) for g in halfspaces]
        verdict = check_c_positive(psi, cone, verify_budget, s_verify + round_)
        if isinstance(verdict, ConeNoViolation):
            status = "feasible" if agreement < 1e-8 else "max_iterations"
            return ExtensionResult(
                status=status,
                extension=psi if status == "feasible" else None,
                certificate={
                    "cone": cone.label,
                    "min_margin": min(margins) if margins else 0.0,
                    "verified_samples": verdict.samples,
                },
                agreement_error=agreement,
                iterations=res.iterations,
            )
        assert isinstance(verdict, ConeViolation)
        halfspaces.append(verdict.element / max(frob_norm(verdict.element), 1e-12))

    return ExtensionResult(
        status="max_iterations",
        extension=None,
        certificate={"cone": cone.label, "last_violation": verdict.value},
        agreement_error=None,
        iterations=res.iterations if res else 0,
    )

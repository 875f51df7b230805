"""Batch experiment runner: each suite replays a family of randomized
checks and reports per-trial pass/fail with reproducible seeds.

Reports are deterministic for a fixed (suite, trials, seed, dims); wall
time is measured for display but excluded from the serialized report so
that identical runs produce identical bytes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import opsys
from .cones import MappingCone, NotRejected, membership_pac
from .extend import NoExtension, extend_c_positive, extend_cp, extension_criterion
from .instances import (
    InstanceSpec,
    generate_instance,
    random_cp_full_map,
    random_positive_full_map,
    random_system,
)
from .linalg import matrix_unit, random_hermitian
from .maps import LinearMap, choi_matrix, matrix_unit_images, restrict

SUITES = ("duality", "arveson", "thm1", "thm2")


@dataclass
class ExperimentReport:
    suite: str
    trials: int
    pass_count: int
    failures: list[dict] = field(default_factory=list)
    wall_time_seconds: float = 0.0

    def to_json(self) -> dict:
        # wall time is intentionally not serialized: reports must be
        # byte-identical across reruns of the same configuration
        return {
            "suite": self.suite,
            "trials": self.trials,
            "pass": self.pass_count,
            "failures": self.failures,
            "wall_time_s": None,
        }

    def table(self) -> str:
        rows = [
            ("suite", self.suite),
            ("trials", str(self.trials)),
            ("pass", str(self.pass_count)),
            ("fail", str(len(self.failures))),
            ("wall_time_s", f"{self.wall_time_seconds:.2f}"),
        ]
        width = max(len(k) for k, _ in rows)
        lines = [f"{k.ljust(width)}  {v}" for k, v in rows]
        for f in self.failures:
            lines.append(f"  FAIL seed={f['seed']} instance={f['instance']}: {f['diagnostic']}")
        return "\n".join(lines)


def _random_full_map(dim_h: int, dim_k: int, rng: np.random.Generator) -> LinearMap:
    system = opsys.full_system(dim_h)
    images = [random_hermitian(rng, dim_k) for _ in system.ortho_basis]
    return LinearMap(domain=system, dim_k=dim_k, images=images)


def duality_gap(phi: LinearMap) -> float:
    """Max over matrix-unit pairs of |Tr(C (a (x) b)) - Tr(phi(a) b^T)|."""
    c = choi_matrix(phi).matrix
    dh, dk = phi.dim_h, phi.dim_k
    t = matrix_unit_images(phi)
    cr = c.reshape(dh, dk, dh, dk)
    worst = 0.0
    for i in range(dh):
        for j in range(dh):
            for k in range(dk):
                for l in range(dk):
                    # Tr(C (e_ij (x) e_kl)) contracts the (j, l, i, k) entry
                    lhs = cr[j, l, i, k]
                    rhs = t[i, j][k, l]  # Tr(phi(e_ij) (e_kl)^T)
                    worst = max(worst, abs(lhs - rhs))
    return worst


def _trial_duality(dims, trial_seed: int) -> str | None:
    rng = np.random.default_rng(trial_seed)
    phi = _random_full_map(dims[0], dims[1], rng)
    gap = duality_gap(phi)
    if gap >= 1e-11:
        return f"duality gap {gap:.3e}"
    return None


def _trial_arveson(dims, trial_seed: int) -> str | None:
    rng = np.random.default_rng(trial_seed)
    dh, dk = dims
    full = random_cp_full_map(dh, dk, rng)
    sa_dim = int(rng.integers(2, dh * dh))
    system = random_system(dh, sa_dim, rng)
    phi = restrict(full, system)
    res = extend_cp(phi, rng_seed=trial_seed)
    if res.status != "feasible":
        return f"status {res.status}"
    if res.certificate["choi_min_eigenvalue"] < -1e-8:
        return f"choi eigenvalue {res.certificate['choi_min_eigenvalue']:.3e}"
    if res.agreement_error >= 1e-8:
        return f"agreement error {res.agreement_error:.3e}"
    return None


def _trial_thm2(dims, trial_seed: int, index: int) -> tuple[str, str | None]:
    if index == 0:
        spec = InstanceSpec(dim_h=4, dim_k=2, system_kind="z_system", map_kind="zmap_scaled", seed=0)
        _, phi = generate_instance(spec)
        verdict = extension_criterion(phi, restarts=32, rng_seed=trial_seed, construct=False)
        if not isinstance(verdict, NoExtension):
            return "zmap_scaled:n=4", "expected NoExtension"
        return "zmap_scaled:n=4", None
    rng = np.random.default_rng(trial_seed)
    dh, dk = dims
    full = random_positive_full_map(dh, dk, rng)
    sa_dim = int(rng.integers(2, dh * dh))
    system = random_system(dh, sa_dim, rng)
    phi = restrict(full, system)
    instance = f"random_positive_restriction:dims={dh}x{dk}"
    verdict = extension_criterion(phi, restarts=8, rng_seed=trial_seed, construct=False)
    if isinstance(verdict, NoExtension):
        return instance, f"false NoExtension, bound {verdict.norm_lower_bound:.6f}"
    return instance, None


def _trial_thm1(dims, trial_seed: int, index: int) -> tuple[str, str | None]:
    rng = np.random.default_rng(trial_seed)
    dh, dk = dims
    cone = MappingCone(dim_h=dh, kind="cp")
    if index % 5 != 4:
        x = random_hermitian(rng, dh * dk)
        full = opsys.full_system(dh)
        verdict = membership_pac(x, full, cone, budget=16, rng_seed=trial_seed)
        direct = float(np.linalg.eigvalsh(x)[0]) >= -1e-8
        sampled = isinstance(verdict, NotRejected)
        if direct != sampled:
            return "membership_reduction", f"direct PSD {direct} vs sampled {sampled}"
        return "membership_reduction", None
    full_map = random_cp_full_map(dh, dk, rng)
    sa_dim = int(rng.integers(2, dh * dh))
    system = random_system(dh, sa_dim, rng)
    phi = restrict(full_map, system)
    by_cone = extend_c_positive(phi, cone, sample_budget=24, rng_seed=trial_seed)
    by_cp = extend_cp(phi, rng_seed=trial_seed)
    if (by_cone.status == "feasible") != (by_cp.status == "feasible"):
        return "extension_verdict_agreement", f"cone {by_cone.status} vs cp {by_cp.status}"
    return "extension_verdict_agreement", None


def run_suite(suite: str, trials: int, seed: int, dims: tuple[int, int] = (2, 2)) -> ExperimentReport:
    """Run a named suite; the report is deterministic given the arguments."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    if dims[0] > 4 or dims[1] > 3:
        raise ValueError(f"dims {dims} beyond the desk-scale guard (H <= 4, K <= 3)")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    trial_seeds = [int(rng.integers(2 ** 63)) for _ in range(trials)]
    failures = []
    for index, trial_seed in enumerate(trial_seeds):
        if suite == "duality":
            instance, diag = f"random_full_map:dims={dims[0]}x{dims[1]}", _trial_duality(dims, trial_seed)
        elif suite == "arveson":
            instance, diag = f"random_cp_restriction:dims={dims[0]}x{dims[1]}", _trial_arveson(dims, trial_seed)
        elif suite == "thm2":
            instance, diag = _trial_thm2(dims, trial_seed, index)
        else:
            instance, diag = _trial_thm1(dims, trial_seed, index)
        if diag is not None:
            failures.append({"seed": trial_seed, "instance": instance, "diagnostic": diag})
    elapsed = time.perf_counter() - start
    return ExperimentReport(
        suite=suite,
        trials=trials,
        pass_count=trials - len(failures),
        failures=failures,
        wall_time_seconds=elapsed,
    )

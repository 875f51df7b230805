"""Command-line surface.

One subcommand per library operation; every randomized command takes
--seed and defaults to 0, never the wall clock.  Exit codes: 0 for success
or a positive verdict, 1 for a negative verdict (violation found, no
extension, infeasible), 2 for invalid input.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import serialize
from .cones import Violation, check_c_positive, parse_cone
from .errors import PosextError
from .extend import (
    NoExtension,
    ProbablyExists,
    extend_c_positive,
    extend_cp,
    extend_positive,
    extension_criterion,
    min_product_state_value,
)
from .instances import InstanceSpec, generate_instance
from .maps import NoViolationFound, ViolationWitness, check_positive, choi_matrix, dual_functional, restricted_norm
from .opsys import REAL_SA
from .suites import SUITES, run_suite


def _load_map(path: str):
    return serialize.map_from_json(serialize.load(path))


def _cmd_gen(args) -> int:
    spec = InstanceSpec(
        dim_h=args.dim_h,
        dim_k=args.dim_k,
        system_kind=args.system,
        map_kind=args.map,
        seed=args.seed,
        system_param=args.system_param,
    )
    _, phi = generate_instance(spec)
    serialize.save(args.out, serialize.map_to_json(phi))
    print(f"wrote {args.out}")
    return 0


def _cmd_choi(args) -> int:
    phi = _load_map(args.map)
    c = choi_matrix(phi)
    eigs = ", ".join(f"{v:.6f}" for v in c.eigenvalues())
    print(f"choi eigenvalues: {eigs}")
    if args.out:
        serialize.save(args.out, serialize.choi_to_json(c))
        print(f"wrote {args.out}")
    return 0


def _cmd_dual(args) -> int:
    phi = _load_map(args.map)
    x = serialize.matrix_from_json(serialize.load(args.element))
    value = dual_functional(phi, x)
    print(f"dual functional value: {value.real:.12g} + {value.imag:.12g}i")
    return 0


def _cmd_check_positive(args) -> int:
    phi = _load_map(args.map)
    verdict = check_positive(phi, budget=args.budget, rng_seed=args.seed)
    if isinstance(verdict, ViolationWitness):
        print(f"violation: image eigenvalue {verdict.lambda_min:.6e}")
        if args.out:
            serialize.save(args.out, serialize.matrix_to_json(verdict.witness))
            print(f"wrote witness to {args.out}")
        return 1
    assert isinstance(verdict, NoViolationFound)
    print(f"no violation found in {verdict.samples_used} samples")
    return 0


def _cmd_check_cpos(args) -> int:
    phi = _load_map(args.map)
    cone = parse_cone(args.cone, phi.dim_h)
    verdict = check_c_positive(phi, cone, budget=args.budget, rng_seed=args.seed)
    if isinstance(verdict, Violation):
        print(f"violation on cone {cone.label}: dual value {verdict.value:.6e}")
        return 1
    print(f"no violation found on cone {cone.label} in {verdict.samples} samples")
    return 0


def _cmd_norm(args) -> int:
    phi = _load_map(args.map)
    bound, witness = restricted_norm(phi, restarts=args.restarts, rng_seed=args.seed)
    note = ""
    if phi.domain.flavor == REAL_SA:
        note = " (search over the self-adjoint span only)"
    print(f"restricted norm lower bound: {bound:.12g}{note}")
    if args.out:
        serialize.save(args.out, serialize.matrix_to_json(witness))
        print(f"wrote witness to {args.out}")
    return 0


def _cmd_criterion(args) -> int:
    phi = _load_map(args.map)
    verdict = extension_criterion(
        phi, restarts=args.restarts, rng_seed=args.seed, construct=not args.no_construct
    )
    if isinstance(verdict, NoExtension):
        print(f"no extension: norm lower bound {verdict.norm_lower_bound:.9f} > 1")
        return 1
    assert isinstance(verdict, ProbablyExists)
    if verdict.extension is not None:
        print(f"extension exists: norm estimate {verdict.norm_estimate:.9f}, extension constructed")
    elif args.retry_restarts and not args.no_construct:
        retry = extend_positive(phi, restarts=args.retry_restarts, rng_seed=args.seed + 1)
        if retry.extension is not None:
            print(f"extension exists: norm estimate {verdict.norm_estimate:.9f}, extension constructed on retry")
            return 0
        print(
            f"inconclusive: norm estimate {verdict.norm_estimate:.9f} consistent with an extension, "
            "construction failed"
        )
    else:
        print(
            f"inconclusive: norm estimate {verdict.norm_estimate:.9f} consistent with an extension, "
            "no construction found"
        )
    return 0


def _cmd_extend(args) -> int:
    phi = _load_map(args.map)
    if args.mode == "cp":
        res = extend_cp(phi, rng_seed=args.seed)
    elif args.mode == "positive":
        res = extend_positive(phi, restarts=args.restarts, rng_seed=args.seed)
    else:
        cone = parse_cone(args.cone, phi.dim_h)
        res = extend_c_positive(phi, cone, sample_budget=args.budget, rng_seed=args.seed)
    print(f"status: {res.status}")
    for key, value in res.certificate.items():
        if isinstance(value, (int, float)):
            print(f"  {key}: {value:.6e}" if isinstance(value, float) else f"  {key}: {value}")
    if res.agreement_error is not None:
        print(f"  agreement_error: {res.agreement_error:.3e}")
    if res.stall_distance is not None:
        print(f"  stall_distance: {res.stall_distance:.6f}")
    if args.out:
        serialize.save(args.out, serialize.result_to_json(res))
        print(f"wrote {args.out}")
    return 0 if res.status == "feasible" else 1


def _cmd_verify(args) -> int:
    dims = tuple(int(v) for v in args.dims.split(","))
    if len(dims) != 2:
        raise PosextError(f"dims must be dh,dk, got {args.dims!r}")
    report = run_suite(args.suite, trials=args.trials, seed=args.seed, dims=dims)
    print(report.table())
    if args.out:
        serialize.save(args.out, report.to_json())
        print(f"wrote {args.out}")
    return 0 if not report.failures else 1


def _cmd_demo(args) -> int:
    spec = InstanceSpec(dim_h=args.n, dim_k=2, system_kind="z_system", map_kind="zmap_scaled", seed=args.seed)
    _, phi = generate_instance(spec)
    factor = 2.0 * np.cos(np.pi / args.n)
    print(f"z instance on dimension {args.n}: image factor 2 cos(pi/{args.n}) = {factor:.9f}")
    verdict = check_positive(phi, budget=2000, rng_seed=args.seed)
    label = "no violation" if isinstance(verdict, NoViolationFound) else "VIOLATION"
    print(f"positivity check: {label}")
    outcome = extension_criterion(phi, restarts=32, rng_seed=args.seed)
    if isinstance(outcome, NoExtension):
        print(f"criterion: no extension, norm lower bound {outcome.norm_lower_bound:.9f}")
        return 1
    constructed = "constructed" if outcome.extension is not None else "not constructed"
    print(f"criterion: norm estimate {outcome.norm_estimate:.9f}, extension {constructed}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="posext", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an instance and write its map JSON")
    p.add_argument("--dim-h", type=int, required=True)
    p.add_argument("--dim-k", type=int, required=True)
    p.add_argument("--system", required=True, choices=("full", "diagonal", "z_system", "random"))
    p.add_argument("--system-param", type=int, default=None, help="n for z_system, dimension for random")
    p.add_argument("--map", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("choi", help="Choi matrix of a full-domain map")
    p.add_argument("--map", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_choi)

    p = sub.add_parser("dual", help="dual functional value at an element")
    p.add_argument("--map", required=True)
    p.add_argument("--element", required=True)
    p.set_defaults(func=_cmd_dual)

    p = sub.add_parser("check-positive", help="sampled positivity check")
    p.add_argument("--map", required=True)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write the violation witness here")
    p.set_defaults(func=_cmd_check_positive)

    p = sub.add_parser("check-cpos", help="sampled cone positivity check")
    p.add_argument("--map", required=True)
    p.add_argument("--cone", required=True, help="cp | cocp | dec | pos | kpos:k")
    p.add_argument("--budget", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_check_cpos)

    p = sub.add_parser("norm", help="restricted norm lower bound with witness")
    p.add_argument("--map", required=True)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("criterion", help="norm criterion for a positive extension")
    p.add_argument("--map", required=True)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-construct", action="store_true", help="skip the constructive search")
    p.add_argument(
        "--retry-restarts",
        type=int,
        default=0,
        help="retry a failed construction with this many extra restarts",
    )
    p.set_defaults(func=_cmd_criterion)

    p = sub.add_parser("extend", help="construct an extension")
    p.add_argument("--map", required=True)
    p.add_argument("--mode", required=True, choices=("cp", "positive", "cone"))
    p.add_argument("--cone", default="cp", help="cone kind for --mode cone")
    p.add_argument("--budget", type=int, default=64, help="half-space samples for --mode cone")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_extend)

    p = sub.add_parser("verify", help="run an experiment suite")
    p.add_argument("--suite", required=True, choices=SUITES)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", default="2,2")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("demo", help="narrated runs of built-in instances")
    demo_sub = p.add_subparsers(dest="demo_kind", required=True)
    pz = demo_sub.add_parser("zmap", help="the z instance at a given dimension")
    pz.add_argument("--n", type=int, required=True)
    pz.add_argument("--seed", type=int, default=0)
    pz.set_defaults(func=_cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PosextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

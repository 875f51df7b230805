"""Positive-map extension toolkit.

Decides and constructs extensions of positive (and mapping-cone-positive)
linear maps from operator systems on a finite-dimensional Hilbert space to
the full matrix algebra, with numerical certificates for every verdict.
"""

from .errors import PosextError
from .linalg import hermitian_eig, kron, operator_norm, psd_project, trace_norm
from .opsys import COMPLEX, REAL_SA, OperatorSystem, build, from_subalgebra_sa, full_system
from .maps import (
    ChoiMatrix,
    LinearMap,
    UnitalizationRecord,
    check_positive,
    choi_matrix,
    dual_functional,
    identity_map,
    map_from_choi,
    restrict,
    restricted_norm,
    transport_extension,
    unitalize,
)
from .cones import MappingCone, check_c_positive, membership_pac, parse_cone, sample_cone_element, sample_pac
from .extend import (
    ExtensionResult,
    FeasibilityProblem,
    dykstra_solve,
    extend_c_positive,
    extend_cp,
    extend_positive,
    extension_criterion,
    min_product_state_value,
)
from .instances import InstanceSpec, generate_instance
from .suites import ExperimentReport, run_suite

__version__ = "0.1.0"

__all__ = [
    "PosextError",
    "hermitian_eig",
    "kron",
    "operator_norm",
    "psd_project",
    "trace_norm",
    "COMPLEX",
    "REAL_SA",
    "OperatorSystem",
    "build",
    "from_subalgebra_sa",
    "full_system",
    "ChoiMatrix",
    "LinearMap",
    "UnitalizationRecord",
    "check_positive",
    "choi_matrix",
    "dual_functional",
    "identity_map",
    "map_from_choi",
    "restrict",
    "restricted_norm",
    "transport_extension",
    "unitalize",
    "MappingCone",
    "check_c_positive",
    "membership_pac",
    "parse_cone",
    "sample_cone_element",
    "sample_pac",
    "ExtensionResult",
    "FeasibilityProblem",
    "dykstra_solve",
    "extend_c_positive",
    "extend_cp",
    "extend_positive",
    "extension_criterion",
    "min_product_state_value",
    "InstanceSpec",
    "generate_instance",
    "ExperimentReport",
    "run_suite",
]

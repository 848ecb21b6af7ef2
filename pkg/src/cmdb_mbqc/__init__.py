"""Stabilizer simulation of AKLT quasichains and the CMDB 2D state as MBQC resources."""

from cmdb_mbqc.coupling import Mode, PauliFrame, connect, couple, disconnect, make_choice
from cmdb_mbqc.distill import DistillationPlan, DistillationReport, distill, plan_brickwall, plan_from_modes
from cmdb_mbqc.encoding import (
    CertificationError,
    GraphState,
    LogicalQubit,
    LogicalRegister,
    build_logicals,
    certify_cluster,
    derive_chain_stabilizers,
    find_domains,
    reduce_domain,
)
from cmdb_mbqc.lattice import LatticeSpec, Layout, SiteMap, build
from cmdb_mbqc.pauli import PauliOperator
from cmdb_mbqc.povm import OutcomeRecord, PovmAxis, run_all, sample_site
from cmdb_mbqc.tableau import (
    MeasurementResult,
    StabilizerState,
    apply_clifford,
    canonical_form,
    measure_pauli,
    project_code_space,
)

__all__ = [
    "CertificationError",
    "DistillationPlan",
    "DistillationReport",
    "GraphState",
    "LatticeSpec",
    "Layout",
    "LogicalQubit",
    "LogicalRegister",
    "MeasurementResult",
    "Mode",
    "OutcomeRecord",
    "PauliFrame",
    "PauliOperator",
    "PovmAxis",
    "SiteMap",
    "StabilizerState",
    "apply_clifford",
    "build",
    "build_logicals",
    "canonical_form",
    "certify_cluster",
    "connect",
    "couple",
    "derive_chain_stabilizers",
    "disconnect",
    "distill",
    "find_domains",
    "make_choice",
    "measure_pauli",
    "plan_brickwall",
    "plan_from_modes",
    "project_code_space",
    "reduce_domain",
    "run_all",
    "sample_site",
]

"""Iterative constraint sampling for LPs with many constraints."""
from .core import (BoxDomain, ContractError, LpInstance, MpcInstance, QueryLedger, SolveOutcome,
                   SolveStats, Status, ViolationVector, compute_widths, violation_vector)
from .classical import clarkson_solve, low_precision_solve, mpc_solve
from .generate import generate, generate_instance
from .fileio import io_roundtrip, read_instance, write_instance
from .quantum import (QueryCostModel, quantum_clarkson, quantum_lp_one_sided,
                      quantum_lp_two_sided, quantum_mpc)
from .simplex import SubLp, simplex_solve, vertex_enumeration_solve

__all__ = [
    "BoxDomain", "ContractError", "LpInstance", "MpcInstance", "QueryLedger", "SolveOutcome",
    "SolveStats", "Status", "ViolationVector", "compute_widths", "violation_vector",
    "clarkson_solve", "low_precision_solve", "mpc_solve", "generate", "generate_instance",
    "io_roundtrip", "read_instance", "write_instance", "QueryCostModel", "quantum_clarkson",
    "quantum_lp_one_sided", "quantum_lp_two_sided", "quantum_mpc", "SubLp", "simplex_solve",
    "vertex_enumeration_solve",
]

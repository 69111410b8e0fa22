"""Unitary paths with small commutator against a fixed self-adjoint element."""

from .assemble import AssembledPath, AssemblyError, assemble_path
from .instances import FAMILIES, Instance, random_instance
from .mollifier import MollifierSpec, mollify
from .pipeline import (
    HomotopyReport, HomotopyResult, HomotopyStageError, HypothesisError, PathVerification,
    delta_for, length_budget, nu_for, run_homotopy, verify_path,
)
from .surgery import (
    BinDecomposition, SurgeryError, SurgeryResult, bin_projections, localization_defects, surgery,
)

__all__ = [
    "AssembledPath", "AssemblyError", "assemble_path", "FAMILIES", "Instance", "random_instance",
    "MollifierSpec", "mollify", "HomotopyReport", "HomotopyResult", "HomotopyStageError",
    "HypothesisError", "PathVerification", "delta_for", "length_budget", "nu_for", "run_homotopy",
    "verify_path", "BinDecomposition", "SurgeryError", "SurgeryResult", "bin_projections",
    "localization_defects", "surgery",
]

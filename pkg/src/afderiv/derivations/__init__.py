"""Hamiltonian ladders, the derivation ``delta = ad iH`` and the certificates built on them."""

from .averaging import (
    AbelianTower, NonAbelianError, averaged_cobounding, cobounding_defect, monte_carlo_cobounding,
    pinching, tensor_tower,
)
from .ladder import (
    CornerProjections, HamiltonianLadder, LadderError, build_interval_ladder, check_windows,
    choose_gap_coefficient, default_windows, delta, delta_norm, gap_coefficient,
)
from .obstruction import (
    CERTIFIED, DISTANCE_LIMIT, NON_APPLICABLE, VIOLATED, ObstructionCertificate,
    ObstructionSampler, ObstructionSweep, SamplerParams, certify_obstruction, obstruction_sweep,
)
from .periodic import (
    TARGETS, CandidatePath, CornerCertificate, LevelCertificate, PathWitness,
    build_periodic_ladder, build_scaled_ladder, candidate_path, corner_invertibility_certificate,
    ladder_scale, path_witness, periodicity_certificates, spectral_gap, target_unitary,
)
from .winding import WindingError, winding_number

__all__ = [
    "AbelianTower", "NonAbelianError", "averaged_cobounding", "cobounding_defect",
    "monte_carlo_cobounding", "pinching", "tensor_tower", "CornerProjections", "HamiltonianLadder",
    "LadderError", "build_interval_ladder", "check_windows", "choose_gap_coefficient",
    "default_windows", "delta", "delta_norm", "gap_coefficient", "CERTIFIED", "DISTANCE_LIMIT",
    "NON_APPLICABLE", "VIOLATED", "ObstructionCertificate", "ObstructionSampler", "ObstructionSweep",
    "SamplerParams", "certify_obstruction", "obstruction_sweep", "TARGETS", "CandidatePath",
    "CornerCertificate", "LevelCertificate", "PathWitness", "build_periodic_ladder",
    "build_scaled_ladder", "candidate_path", "corner_invertibility_certificate", "ladder_scale",
    "path_witness", "periodicity_certificates", "spectral_gap", "target_unitary", "WindingError",
    "winding_number",
]

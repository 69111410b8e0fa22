"""Block-matrix C*-algebra arithmetic and spectral primitives."""

from .algebra import (
    CERT_TOL,
    AlgebraMismatch,
    BlockAlgebra,
    Element,
    FlagError,
    commutator,
    direct_sum,
    graph_norm,
    operator_norm,
)
from .paths import (
    ProjectionMismatch,
    Segment,
    UnitaryPath,
    connect_projections,
    rotation_generator,
)
from .spectral import (
    BranchCutError,
    ContourError,
    NotSelfAdjoint,
    NotUnitary,
    RieszProjection,
    SingularInput,
    SpectralData,
    branch_margin,
    eig_hermitian,
    expi,
    polar_unitary,
    positive_part,
    principal_log_unitary,
    rank,
    riesz_projection,
    spectral_projection,
    support_projection,
    unitary_log,
)

__all__ = [name for name in dir() if not name.startswith("_")]

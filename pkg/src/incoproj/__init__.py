"""Incoherent projection design for compressed sensing.

Three projection optimizers (Gram shrinkage, spectral rank-one updates,
alternating projections), coherence diagnostics, sparse-recovery solvers
(OMP, Basis Pursuit on a built-in LP), K-SVD / coupled dictionary
learning, and a reproducible benchmark harness.
"""

from .altproj import (
    AltProjConfig,
    AltProjTrace,
    altproj_optimize,
    normalize_gram,
    project_convex,
    project_rank,
    recover_projection,
)
from .coherence import (
    CoherenceReport,
    ThresholdResult,
    coherence_report,
    gram_t_average,
    mutual_coherence,
    offdiag_histogram,
    offdiag_magnitudes,
    relative_threshold,
    t_average_coherence,
)
from .dictlearn import (
    CoupledConfig,
    CoupledTrace,
    FixedProjection,
    KSVDTrace,
    SapiroInner,
    TrainingSet,
    atom_update_sweep,
    purge_duplicate_atoms,
    coupled_ksvd,
    ksvd,
    sense_training_signals,
    sparse_code,
)
from .elad import (
    EladConfig,
    FixedThreshold,
    OptimizerTrace,
    RelativeThreshold,
    elad_optimize,
    shrink_elad,
)
from .errors import (
    ConfigError,
    DegenerateDiagonal,
    DegenerateSpectrum,
    EmptyAverage,
    IncoprojError,
    InvalidRank,
    NotFound,
    NotPSD,
    RankExceeded,
    SingularSystem,
    TooFewColumns,
    TooLarge,
    ZeroColumn,
)
from .harness import (
    AltProjArm,
    EladArm,
    ExperimentConfig,
    FileSource,
    GaussianSource,
    RandomArm,
    SapiroArm,
    SummaryCell,
    SweepSummary,
    TrialRecord,
    derive_seed,
    emit_reports,
    read_trials,
    resolve_config,
    run_sweep,
    summarize,
    synthesize_signals,
)
from .linalg import (
    Dictionary,
    ProjectionMatrix,
    eigh_descending,
    gram,
    lsq_projection,
    normalize_columns,
    sqrt_factor,
    symmetric_rank_truncate,
)
from .lp import LPResult, solve_standard_lp
from .pursuit import (
    RecoveryResult,
    RecoveryStatus,
    SparseVector,
    basis_pursuit,
    exhaustive_sparsest,
    omp,
)
from .sapiro import SapiroState, sapiro_objective, sapiro_optimize, spectral_state

__version__ = "0.1.0"

__all__ = [
    "AltProjArm",
    "AltProjConfig",
    "AltProjTrace",
    "CoherenceReport",
    "ConfigError",
    "CoupledConfig",
    "CoupledTrace",
    "DegenerateDiagonal",
    "DegenerateSpectrum",
    "Dictionary",
    "EladArm",
    "EladConfig",
    "EmptyAverage",
    "ExperimentConfig",
    "FileSource",
    "FixedProjection",
    "FixedThreshold",
    "GaussianSource",
    "IncoprojError",
    "InvalidRank",
    "KSVDTrace",
    "LPResult",
    "NotFound",
    "NotPSD",
    "OptimizerTrace",
    "ProjectionMatrix",
    "RandomArm",
    "RankExceeded",
    "RecoveryResult",
    "RecoveryStatus",
    "RelativeThreshold",
    "SapiroArm",
    "SapiroInner",
    "SapiroState",
    "SingularSystem",
    "SparseVector",
    "SummaryCell",
    "SweepSummary",
    "ThresholdResult",
    "TooFewColumns",
    "TooLarge",
    "TrainingSet",
    "TrialRecord",
    "ZeroColumn",
    "altproj_optimize",
    "atom_update_sweep",
    "purge_duplicate_atoms",
    "basis_pursuit",
    "coherence_report",
    "coupled_ksvd",
    "derive_seed",
    "eigh_descending",
    "elad_optimize",
    "emit_reports",
    "exhaustive_sparsest",
    "gram",
    "gram_t_average",
    "ksvd",
    "lsq_projection",
    "mutual_coherence",
    "normalize_columns",
    "normalize_gram",
    "offdiag_histogram",
    "offdiag_magnitudes",
    "omp",
    "project_convex",
    "project_rank",
    "read_trials",
    "recover_projection",
    "relative_threshold",
    "resolve_config",
    "run_sweep",
    "sapiro_objective",
    "sapiro_optimize",
    "sense_training_signals",
    "shrink_elad",
    "solve_standard_lp",
    "sparse_code",
    "spectral_state",
    "sqrt_factor",
    "summarize",
    "symmetric_rank_truncate",
    "synthesize_signals",
    "t_average_coherence",
]

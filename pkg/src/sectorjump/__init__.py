"""Open-system simulation in symmetry sectors.

Finite-dimensional Lindblad dynamics with Abelian weak symmetries: sector
decompositions, weakly symmetric representations (projected and minimal),
block-diagonal generators, sector-confined quantum-jump Monte Carlo, and a
dense brute-force path for cross-validation.
"""

from .errors import (
    AllRatesZero,
    BoundViolated,
    CertificationError,
    ClusterAmbiguity,
    DegenerateSteadyState,
    DimCapExceeded,
    DimensionMismatch,
    HermiticityViolation,
    InvalidU,
    InvalidWindow,
    MixesShiftClasses,
    NegativeTime,
    NonUniform,
    NonUniqueSteadyState,
    NormIncreased,
    NotCertified,
    NotCommuting,
    NotHermitian,
    NotUnitary,
    NotWeaklySymmetric,
    NumericalError,
    SchemaError,
    SectorJumpError,
    ShiftLeavesSpectrum,
    ShiftOnAsymmetricJump,
    UnitarityViolation,
    ZeroTotalRate,
)
from .liouville import (
    BlockLiouvillian,
    SteadyStateReport,
    assemble_dense,
    build_blocks,
    build_dense,
    devectorize,
    propagate,
    steady_state,
    symmetry_superoperator_matrix,
    vectorize,
)
from .models import (
    DIM_CAP,
    ChainSpec,
    MomentumBasis,
    SparsityReport,
    SpinModelSpec,
    build_chain,
    build_spin_model,
    ladder_jumps,
    momentum_basis,
    plane_wave_jumps,
    site_operator,
    sparsity_census,
    total_sz,
    translation_operator,
)
from .opcore import (
    ID2,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    as_density_matrix,
    as_operator,
    as_state_vector,
    expm_apply,
    frobenius_inner,
    hermitian_eig,
    is_hermitian,
    is_unitary,
    phase_distance,
    unitary_eig,
    wrap_phase,
)
from .qjmc import (
    EnsembleEstimate,
    JumpEvent,
    SectorEngine,
    SectorState,
    SectorSuperposition,
    Snapshot,
    TrajectoryRecord,
    ensemble_average,
    occupied_coherence_classes,
    run_trajectory,
    run_trajectory_general,
    run_trajectory_sectored,
    sample_waiting_time,
    select_jump,
    time_average,
)
from .representation import (
    ActionMatrix,
    CertificateReport,
    GaugeTransform,
    GramData,
    LindbladRep,
    WeaklySymmetricRep,
    action_matrix,
    apply_gauge,
    certify,
    effective_hamiltonian,
    gram_orthogonalize,
    make_traceless,
    minimal_weak_rep,
    projected_weak_rep,
    specs_from_decomposition,
)
from .symmetry import (
    GENERATOR,
    UNITARY,
    AbelianGroupSpec,
    Sector,
    SectorDecomposition,
    SuperShift,
    SymmetrySpec,
    apply_shift,
    conjugate,
    decompose,
    is_symmetric_value,
    joint_decompose,
    label_distance,
    members_of,
    ratio_value,
    weak_symmetry_residual,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

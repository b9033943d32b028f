"""Exception taxonomy shared across the package.

Three broad families matter to callers: schema problems in run configs,
certification problems (a representation or its tags fail their defining
equations), and numerical problems at run time.  The CLI maps these onto
exit codes 2, 3 and 4.
"""


class SectorJumpError(Exception):
    """Base class for all package errors."""


class SchemaError(SectorJumpError):
    """Run configuration failed validation.

    Carries the full list of problems so a user can fix them in one pass.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class CertificationError(SectorJumpError):
    """A symmetry or representation property failed its defining check."""


class NumericalError(SectorJumpError):
    """A runtime numerical guard tripped."""


# ---- construction / validation -------------------------------------------

class DimensionMismatch(SectorJumpError):
    pass


class NotHermitian(CertificationError):
    pass


class NotUnitary(CertificationError):
    pass


class NotCommuting(CertificationError):
    """Declared group members do not commute."""


class ClusterAmbiguity(NumericalError):
    """Eigenvalue gaps fall inside the ambiguous band around the clustering
    tolerance, so the sector split cannot be trusted."""


# ---- representation construction -----------------------------------------

class NotWeaklySymmetric(CertificationError):
    """Generator does not commute with the declared symmetry."""


class UnitarityViolation(CertificationError):
    pass


class HermiticityViolation(CertificationError):
    pass


class AllRatesZero(NumericalError):
    """Every Gram eigenvalue fell below the rate cutoff."""


class MixesShiftClasses(CertificationError):
    """A gauge isometry couples jump operators with different shifts."""


class ShiftOnAsymmetricJump(CertificationError):
    """Identity offsets are only allowed on symmetric jump operators."""


class NotCertified(CertificationError):
    """Representation does not satisfy the support/eigenmatrix equations
    required for block assembly."""


# ---- dynamics --------------------------------------------------------------

class NegativeTime(SectorJumpError):
    pass


class DegenerateSteadyState(NumericalError):
    """Symmetric-block kernel has dimension > 1; no unique stationary state.

    Carries the near-null eigenvalues so the caller can inspect the
    degeneracy instead of silently picking a vector.
    """

    def __init__(self, message, null_eigenvalues=()):
        self.null_eigenvalues = list(null_eigenvalues)
        super().__init__(message)


class NonUniqueSteadyState(NumericalError):
    """Ergodic time averaging refused: stationary state is not unique."""


class InvalidU(SectorJumpError):
    """Waiting-time threshold u must lie in (0, 1]."""


class NormIncreased(NumericalError):
    """Squared norm grew beyond 1 + 1e-8 under no-jump evolution."""


class ZeroTotalRate(NumericalError):
    """All jump rates vanished at a sampled jump time."""


class ShiftLeavesSpectrum(CertificationError):
    """A jump's shift tag maps a sector label outside the spectrum while the
    jump still has support there."""


class InvalidWindow(SectorJumpError):
    """Time-average window is empty."""


class DimCapExceeded(SectorJumpError):
    """Requested model dimension exceeds the configured cap."""


class NonUniform(CertificationError):
    """Site jumps are not translates of one another, so the plane-wave
    recombination does not apply."""


class BoundViolated(NumericalError):
    """Sparsity census exceeded the declared per-column bound."""

"""Exception and warning types shared across the package."""


class WeakmeasError(Exception):
    """Base class for all package-specific errors."""


class InvalidSpin(WeakmeasError):
    """j is not a non-negative half-integer."""


class TruncationError(WeakmeasError):
    """Fock-space truncation drops more probability than allowed."""


class DimError(WeakmeasError):
    """Hilbert-space dimensions of the operands do not match."""


class NotHermitian(WeakmeasError):
    """Operator matrix is not equal to its conjugate transpose."""


class GridCoverageError(WeakmeasError):
    """Grid does not cover the state (mass leaking at an edge in x or p)."""


class ResolutionError(WeakmeasError):
    """Requested feature is below the grid resolution."""


class RepresentationError(WeakmeasError):
    """Wavefunction is in the wrong representation for this transform."""


class OrthogonalPostSelection(WeakmeasError):
    """Transition probability vanishes; weak value undefined for this branch."""


class BasisError(WeakmeasError):
    """Post-selection basis is not complete/orthonormal."""


class UndefinedABL(WeakmeasError):
    """All intermediate-outcome amplitudes vanish; conditional table undefined."""


class FallOffViolation(WeakmeasError):
    """Apparatus wavefunction does not fall off fast enough for a complex shift."""


class MultimodalPosterior(WeakmeasError):
    """Posterior reaction-variable distribution has more than one mode."""


class VarianceUndefined(WeakmeasError):
    """Momentum variance does not exist (heavy-tailed state)."""


class MultipleExtremals(WeakmeasError):
    """Classical boundary problem admits more than one extremal trajectory."""


class StarvedSampler(WeakmeasError):
    """Monte Carlo acceptance rate fell below the workable threshold."""


class PartitionError(WeakmeasError):
    """Window partition does not cover the state."""


class EigenstateDegenerate(WeakmeasError):
    """State is an eigenstate of the observable; weak-value scatter is zero."""


class BiasWarning(UserWarning):
    """Initial state is not a real state; pointer reference origin may be biased."""


class LinearityWarning(UserWarning):
    """Phase-linearity condition is not well satisfied inside a window."""

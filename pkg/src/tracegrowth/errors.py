"""Exception types shared across the package."""


class TraceGrowthError(Exception):
    """Base class for all package-specific errors."""


class DegenerateChart(TraceGrowthError):
    """The differential of a chart map is rank deficient, or the induced
    metric is not positive definite, at a sampled point."""


class SingularRadialField(TraceGrowthError):
    """Radial data requested at (or too close to) the base point, where the
    distance gradient is undefined."""


class ProfileDomain(TraceGrowthError):
    """A radius fell outside the validity window of a comparison profile."""


class NotPositiveSemidefinite(TraceGrowthError):
    """An operator field declared positive-semidefinite has a negative
    eigenvalue beyond tolerance somewhere.  Carries the offending parameter
    point in ``location``."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class DegenerateDistribution(TraceGrowthError):
    """Spanning vector fields of a distribution are linearly dependent at the
    evaluation point."""


class MeshDisconnected(TraceGrowthError):
    """The lattice graph of a meshed region is not connected."""


class InsufficientResolution(TraceGrowthError):
    """A mesh is too coarse for the requested boundary-integral estimate."""


class HypothesisViolated(TraceGrowthError):
    """A growth bound was requested whose pointwise hypotheses do not hold.
    ``certificate`` holds the worst offending point and its margin."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class UnsupportedOperation(TraceGrowthError):
    """Operation requested outside its supported range (wrong codimension,
    unknown preset name, and so on)."""

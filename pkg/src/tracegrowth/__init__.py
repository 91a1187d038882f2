"""Numerical calculus of symmetric operator fields on immersed submanifolds.

The package measures trace integrals of positive-semidefinite operator fields
over geodesic balls of explicitly parametrized submanifolds and checks them
against the comparison-theory lower bounds that control their growth.
"""

from tracegrowth.errors import (
    DegenerateChart,
    DegenerateDistribution,
    HypothesisViolated,
    InsufficientResolution,
    MeshDisconnected,
    NotPositiveSemidefinite,
    ProfileDomain,
    SingularRadialField,
    TraceGrowthError,
    UnsupportedOperation,
)

__version__ = "0.1.0"

"""Exception hierarchy for the estimation library."""

from typing import Optional


class StableTMLEError(Exception):
    """Base class for all library errors."""


class InvalidParameter(StableTMLEError, ValueError):
    """A parameter vector violates its box invariants."""


class InvalidGrid(StableTMLEError, ValueError):
    """Evaluation points violate the grid invariants (u_i != 0, |u_i| distinct)."""


class NotPositiveDefinite(StableTMLEError):
    """Cholesky factorization hit a non-positive pivot."""

    def __init__(self, pivot: int, message: Optional[str] = None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")


class FactorizationFailure(StableTMLEError):
    """Sigma could not be factorized even with the largest ridge."""


class DimensionMismatch(StableTMLEError, ValueError):
    """Right-hand side does not match the factor dimension."""


class SingularInformation(StableTMLEError):
    """Approximate information matrix is singular after ridge escalation."""


class DegenerateSample(StableTMLEError, ValueError):
    """Sample is constant or scaled so badly that the empirical ch.f. is useless."""


class ConfigError(StableTMLEError, ValueError):
    """Experiment configuration is missing fields or holds invalid values."""


class ReplicationFailed(StableTMLEError):
    """One or more Monte Carlo replications raised a hard error."""

    def __init__(self, failures: dict):
        self.failures = failures
        listed = ", ".join(f"{index}: {reason}" for index, reason in sorted(failures.items()))
        super().__init__(f"{len(failures)} replication(s) failed ({listed})")

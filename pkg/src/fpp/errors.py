"""Exception hierarchy for the fpp package."""


class FPPError(Exception):
    """Base class for every error raised by fpp."""


class DomainError(FPPError, ValueError):
    """An argument lies outside the domain of the operation (e.g. vertex outside a region)."""


class MalformedPathError(DomainError):
    """Consecutive path vertices are not lattice neighbours."""


class NotCertifiableError(FPPError):
    """No finite region can be certified to contain every geodesic."""


class HypothesisError(FPPError):
    """The weight law does not satisfy the hypotheses an operation requires."""


class OracleSizeError(FPPError):
    """An exhaustive computation would exceed the configured size cap."""

"""Exception types shared across the package."""


class PalhError(Exception):
    """Base class for all package errors."""


class DomainError(PalhError, ValueError):
    """An argument lies outside the supported domain of an operation."""


class ConfigError(PalhError, ValueError):
    """A configuration value is missing, unknown or invalid."""


class MeshError(PalhError):
    """Mesh construction or point lookup failed."""


class SolverError(PalhError):
    """A linear solve failed or produced an unacceptable residual."""

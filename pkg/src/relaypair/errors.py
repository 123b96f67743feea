"""Exception hierarchy."""


class RelayPairError(Exception):
    """Base class for all package errors."""


class ConfigError(RelayPairError, ValueError):
    """Invalid configuration (channel stats, solver settings, scenario files)."""


class DomainError(RelayPairError, ValueError):
    """An operation was called outside its mathematical domain."""


class ValidationError(RelayPairError, ValueError):
    """A produced allocation or pairing violates a feasibility contract."""


class InfeasibleBudgetError(RelayPairError, ValueError):
    """Positive power budget but no channel able to carry power."""


class SizeLimitError(RelayPairError, ValueError):
    """Brute-force enumeration requested beyond its supported size."""

"""Exception taxonomy shared by all modules."""


class DomainError(ValueError):
    """An argument is outside the operation's stated domain."""


class TableRangeError(DomainError):
    """A lookup fell outside a precomputed table's range."""


class IntervalRangeError(DomainError):
    """An interval endpoint exceeds the supported integer width."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed the configured work bound."""


class ConfigurationError(ValueError):
    """Bad CLI/config input: unknown name, unparsable value, missing key."""


class ContractViolationError(RuntimeError):
    """An internal contract failed (negative rule value, partition mismatch)."""

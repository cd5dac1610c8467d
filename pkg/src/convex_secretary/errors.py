"""Exception types shared across the package.

The CLI maps these onto exit codes: :class:`ConfigError` -> 2,
:class:`InternalConsistencyError` (and its subclass
:class:`InvariantViolation`) -> 3.
"""


class ConfigError(ValueError):
    """Bad input: malformed instance, unsupported parameters, violated preconditions."""


class InternalConsistencyError(RuntimeError):
    """Two independent computations that must agree did not."""


class InvariantViolation(InternalConsistencyError):
    """An online run produced an output that breaks a safety invariant."""

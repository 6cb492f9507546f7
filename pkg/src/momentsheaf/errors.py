"""Error types shared across the package.

The CLI maps these to exit codes: ValidationError -> 2, ResourceCapError -> 3,
and ConsistencyError (an internal invariant broke, e.g. a generator appeared
beyond a proven degree bound) -> 3 as well, since it aborts the computation.
"""


class ValidationError(ValueError):
    """Malformed or inconsistent input data."""


class ResourceCapError(RuntimeError):
    """A configured size cap (group order, path count) was exceeded."""


class ConsistencyError(RuntimeError):
    """An internal invariant failed; results would be unreliable."""

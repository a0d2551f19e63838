"""Exception hierarchy shared across the toolkit.

The CLI maps these onto distinct exit codes, so raise the most specific
class that applies.
"""


class EntailkitError(Exception):
    """Base class for all toolkit errors."""


class DataError(EntailkitError):
    """Malformed input files, invariant violations, bad task definitions."""


class ValidationError(DataError):
    """A domain object failed its invariant checks.

    ``failures`` lists every failed check so callers can report all of them
    at once.
    """

    def __init__(self, failures: list[str]):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


class BackendError(EntailkitError):
    """Training/scoring failures, including bridge transport problems."""

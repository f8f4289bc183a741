"""Exception hierarchy shared by the engine, the CLI and the service."""


class MvtggError(Exception):
    """Base class for all engine errors."""


class ConfigurationError(MvtggError):
    """Bad grammar, type graph or rule definition."""


class InputError(MvtggError):
    """Bad history, modification, state file or element reference."""

    def __init__(self, message: str, index: int | None = None):
        if index is not None:
            full = f"modification {index}: {message}"
        else:
            full = message
        super().__init__(full)
        self.detail = message
        self.index = index


class NotApplicableError(MvtggError):
    """A rule application was requested at a match that does not satisfy it."""


class ContractViolation(MvtggError):
    """A caller broke an operation precondition (e.g. non-injective match)."""


class BenchmarkIntegrityError(MvtggError):
    """Benchmark strategies produced results that are not isomorphic."""

"""Exception hierarchy shared by the library and the CLI."""


class TpcrError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(TpcrError, ValueError):
    pass


class MalformedMatrixError(TpcrError, ValueError):
    pass


class RankDeficientError(TpcrError, ValueError):
    pass


class EnumerationCapError(TpcrError, ValueError):
    """Brute-force oracle refused an instance larger than its row cap."""


class NoFeasibleSubsetError(TpcrError, RuntimeError):
    pass


class TrimmedFitError(TpcrError, RuntimeError):
    """The fit step failed on a kept subset."""

    def __init__(self, iteration, cause):
        super().__init__(f"fit failed at iteration {iteration}: {cause}")
        self.iteration = iteration
        self.cause = cause

"""Exception hierarchy shared by the solvers, verifiers and loaders."""


class FairDivError(Exception):
    """Base class for every error raised by fairdiv."""


class StructuralError(FairDivError, ValueError):
    """An item set, allocation or cycle is malformed (bad index, overlap...)."""


class InvalidRange(FairDivError, ValueError):
    """A valuation takes a value outside the range a solver accepts."""


class InvalidRegime(FairDivError, ValueError):
    """Classification was requested for a regime the bundle does not fit."""


class NotIdentical(FairDivError, ValueError):
    """A solver requiring identical agents received distinct valuations."""


class NotTrilean(FairDivError, ValueError):
    """Valuations take more than two distinct nonzero values."""


class PreconditionFailed(FairDivError, ValueError):
    pass


class UnexpectedViolation(FairDivError, RuntimeError):
    """A fixer received an EF1 violation outside the patterns it can repair."""


class WrongAgentCount(FairDivError, ValueError):
    pass


class NotCommonThreshold(FairDivError, ValueError):
    pass


class BudgetExceeded(FairDivError, RuntimeError):
    """An exhaustive search would enumerate more assignments than allowed."""


class InstanceFileError(FairDivError, ValueError):
    """A serialized instance or allocation failed to parse or validate.

    ``path`` points at the offending field, e.g. ``values[1][0]``.
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)

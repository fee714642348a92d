"""Exception hierarchy shared by all modules."""


class IncrLearnError(Exception):
    """Base class for every error raised by this package."""


class DegenerateVectorError(IncrLearnError, ValueError):
    """A vector with (numerically) zero norm was normalized."""


class EmptyInputError(IncrLearnError, ValueError):
    pass


class ShapeError(IncrLearnError, ValueError):
    pass


class NoClassesError(IncrLearnError, ValueError):
    """The model has no output heads yet."""


class InvalidTargetError(IncrLearnError, ValueError):
    pass


class DivergenceError(IncrLearnError, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, step, loss):
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}, step {step}")
        self.epoch = epoch
        self.step = step
        self.loss = loss


class BudgetExhaustedError(IncrLearnError, ValueError):
    """The memory budget cannot hold one exemplar per class."""


class InsufficientSamplesError(IncrLearnError, ValueError):
    pass


class InvalidReductionError(IncrLearnError, ValueError):
    pass


class MissingExemplarsError(IncrLearnError, ValueError):
    pass


class MissingDataError(IncrLearnError, ValueError):
    pass


class ScheduleError(IncrLearnError, ValueError):
    pass


class UnknownStrategyError(IncrLearnError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ParseError(IncrLearnError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyDatasetError(IncrLearnError, ValueError):
    pass


class CheckpointError(IncrLearnError):
    """Base class for checkpoint decoding failures."""


class VersionMismatchError(CheckpointError):
    pass


class TruncationError(CheckpointError):
    pass


class InvariantViolationError(CheckpointError):
    def __init__(self, invariant, detail=""):
        msg = f"invariant violated: {invariant}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.invariant = invariant

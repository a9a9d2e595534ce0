"""Exception hierarchy shared by the library and the CLI."""


class FreqTrackError(Exception):
    """Base class for every error raised by freqtrack."""


class SignalSpecError(FreqTrackError, ValueError):
    """A signal description violates one of its invariants."""


class UnsupportedKindError(FreqTrackError, ValueError):
    pass


class DomainError(FreqTrackError, ValueError):
    """Argument lies outside the domain on which a quantity is defined."""


class ConfigurationError(FreqTrackError, ValueError):
    pass


class NumericOverflowError(FreqTrackError, ArithmeticError):
    """Integration produced a non-finite state."""

    def __init__(self, step_index, message=None):
        self.step_index = step_index
        super().__init__(message or f"non-finite estimator state at step {step_index}")


class NotEnoughDecayError(FreqTrackError, ValueError):
    """The error trace does not decay far enough to fit an exponential rate."""


class NotConvergedError(FreqTrackError, ValueError):
    """The trace has not settled, so steady-state statistics are meaningless."""


class IngestionError(FreqTrackError, ValueError):
    def __init__(self, message, row=None):
        self.row = row
        super().__init__(message)


class ParseError(IngestionError):
    def __init__(self, message, row, column):
        self.column = column
        super().__init__(message, row=row)

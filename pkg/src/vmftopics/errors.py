"""Exception types shared across the package."""


class FormatError(Exception):
    """A corrupt or malformed input file (embedding binary, vocabulary TSV,
    label TSV or checkpoint). Carries the byte offset or line number where
    parsing failed."""

    def __init__(self, message, offset=None, line=None):
        where = ""
        if offset is not None:
            where = f" (byte offset {offset})"
        elif line is not None:
            where = f" (line {line})"
        super().__init__(f"{message}{where}")
        self.offset = offset
        self.line = line


class EmptyCorpusError(Exception):
    """Vocabulary filtering removed every token."""


class NumericError(Exception):
    """A non-finite value appeared in a computation that requires finite input."""


class DegenerateEncodingError(Exception):
    """The raw encoder output has (near-)zero norm and cannot be projected
    onto the unit sphere."""


class ParameterError(ValueError):
    """An argument violates an operation's precondition."""


class TrainingError(Exception):
    """Training produced a non-finite loss. Carries the epoch and batch."""

    def __init__(self, message, epoch=None, batch=None, state=None):
        loc = ""
        if epoch is not None:
            loc = f" (epoch {epoch}, batch {batch})"
        super().__init__(f"{message}{loc}")
        self.epoch = epoch
        self.batch = batch
        self.state = state


class GradientCheckError(Exception):
    """Analytic and finite-difference gradients disagree beyond tolerance."""

    def __init__(self, message, parameter=None, error=None):
        super().__init__(message)
        self.parameter = parameter
        self.error = error


class VerificationError(Exception):
    """The GMM-posterior / softmax identity check exceeded its tolerance."""

    def __init__(self, message, deviation=None, seed=None):
        super().__init__(message)
        self.deviation = deviation
        self.seed = seed


class UsageError(Exception):
    """Bad command-line flags or configuration keys."""

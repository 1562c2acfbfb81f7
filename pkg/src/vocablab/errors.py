"""Exception types shared across the toolkit."""


class VocabLabError(Exception):
    """Base class for all toolkit errors."""


class InputError(VocabLabError):
    """Unusable input data: empty corpus, no scoreable pairs, and the like."""


class ConfigurationError(VocabLabError):
    """Requested settings cannot produce a valid artifact."""


class FormatError(VocabLabError):
    """A file or token stream violates its declared format."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CollisionError(FormatError):
    """A token already carries the prefix that was about to be applied."""


class DecodingError(VocabLabError):
    """A token cannot be decoded because it is not in the piece inventory."""


class AlignmentError(VocabLabError):
    """Parallel inputs disagree in line counts."""


class QuotaError(VocabLabError):
    """A component does not hold enough lines to satisfy its request."""


class ConsistencyError(VocabLabError):
    """Computed values violate an identity the pipeline guarantees."""


class ComparabilityError(VocabLabError):
    """Score reports with different signatures cannot be aggregated."""


class StageError(VocabLabError):
    """A pipeline stage failed; completed artifacts are left in place."""

    def __init__(self, stage, message, exit_code):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage
        self.exit_code = exit_code

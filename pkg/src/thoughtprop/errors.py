"""Exception hierarchy. Each class carries the CLI exit code for its category."""


class ThoughtPropError(Exception):
    exit_code = 1


class InvalidArgumentError(ThoughtPropError, ValueError):
    exit_code = 2


class SizeLimitError(InvalidArgumentError):
    """Raised when an exponential search is asked to run on too large a graph."""


class DatasetGenerationError(ThoughtPropError):
    exit_code = 3


class BackendError(ThoughtPropError):
    """Base class for chat backend failures."""


class BackendUnavailableError(BackendError):
    exit_code = 4


class BackendRejectedError(BackendError):
    exit_code = 5

    def __init__(self, status, body):
        self.status = status
        self.body = body
        super().__init__(f"backend rejected request with status {status}: {body[:300]}")


class OracleParseError(BackendError):
    """The simulated backend got a prompt it does not recognise."""

    exit_code = 5


class ParseFailure(ThoughtPropError):
    """No structured answer could be recovered from model text."""


class IntegrityError(ThoughtPropError):
    exit_code = 6


class NotFoundError(ThoughtPropError):
    exit_code = 7


class EmptyReportError(ThoughtPropError):
    exit_code = 8

import logging

logger = logging.getLogger(__name__)


class PwlcycleError(Exception):
    """Base class. ``exit_code`` is what the CLI returns for it."""

    exit_code = 3


class ValidationError(PwlcycleError):
    exit_code = 1


class NotSewing(PwlcycleError):
    """Raw system fails the crossing (no sliding) hypothesis."""

    exit_code = 2

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class NotDefined(PwlcycleError):
    """The half-map of a zone does not exist for its parameters."""


class DomainError(PwlcycleError):
    pass


class ConvergenceError(PwlcycleError):
    pass


class PreconditionViolation(PwlcycleError):
    pass


class NotApplicable(PwlcycleError):
    pass


class UniquenessViolation(PwlcycleError):
    """Two simple zeros of the displacement function survived refinement."""


class NotClosed(PwlcycleError):
    """A flight of the full turn does not return to the switching line."""


class InconsistentVerdict(PwlcycleError):
    """Two independent stability computations disagree."""


def throw(message, exc=ValidationError):
    """Log ``message`` and raise it as ``exc``."""
    logger.debug("%s: %s", exc.__name__, message)
    raise exc(message)


def log_error(title):
    """Record the exception being handled, with its traceback, under ``title``."""
    logger.error("%s", title, exc_info=True)

"""Exception taxonomy shared across the engine.

Errors that an agent can repair by re-answering carry the ``retryable``
marker; the retry loop in ``agents.base`` feeds their messages back to
the agent verbatim.
"""

from __future__ import annotations


class SoftpropError(Exception):
    """Base class for all engine errors."""

    retryable = False


class InvalidInput(SoftpropError):
    pass


class NotFound(SoftpropError):
    pass


class IdConflict(SoftpropError):
    """Duplicate or malformed node id; signals analyzer retry upstream."""

    retryable = True


class SchemaMismatch(SoftpropError):
    """Payload keys do not match the expected child-id set."""

    retryable = True


class CoefficientError(SoftpropError):
    """Coefficients violate rule constraints or drive the result out of [0, 1]."""

    retryable = True


class ConstraintViolation(SoftpropError):
    pass


class FormulaParseError(SoftpropError):
    """Formula text rejected by the grammar, with token position."""

    retryable = True

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message)
        self.position = position


class UnboundVariable(SoftpropError):
    retryable = True


class MixedRules(SoftpropError):
    pass


class TooLarge(SoftpropError):
    pass


class Unsupported(SoftpropError):
    pass


class TemplateError(SoftpropError):
    pass


class MissingPayload(SoftpropError):
    retryable = True


class PayloadSyntax(SoftpropError):
    retryable = True


class AgentExhausted(SoftpropError):
    """Retry budget spent; carries the last raw response for diagnosis."""

    def __init__(self, message: str, last_response: str | None = None,
                 last_error: Exception | None = None):
        super().__init__(message)
        self.last_response = last_response
        self.last_error = last_error


class RunFailed(SoftpropError):
    def __init__(self, message: str, partial_tree=None):
        super().__init__(message)
        self.partial_tree = partial_tree


class Transport(SoftpropError):
    pass


class InvalidConfig(SoftpropError):
    pass


class InvalidSpec(SoftpropError):
    pass


class InsufficientRuns(SoftpropError):
    pass


class IntegrityError(SoftpropError):
    pass

"""Exception types shared across modules.

Precondition violations raise ``ValueError``; everything below signals a
named failure mode that callers are expected to catch.
"""


class SigAgentError(Exception):
    """Base class for framework errors."""


class RemoteUnavailable(SigAgentError):
    pass


class FixtureExhausted(SigAgentError):
    pass


class EmptyIndex(SigAgentError):
    pass


class DecompositionParseError(SigAgentError):
    pass


class CyclicPlanError(SigAgentError):
    pass


class PredictorMissing(SigAgentError):
    pass


class CorruptPayload(SigAgentError):
    pass


class LlmProposalFailed(SigAgentError):
    pass


class PoolTooSmall(SigAgentError):
    pass


class ObjectiveError(SigAgentError):
    """Soft evaluation failure; the optimizer records a penalty and moves on."""


class OptimizationAborted(SigAgentError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class FrameTooShort(SigAgentError):
    pass


class EmptyBand(SigAgentError):
    pass


class SingleClassError(SigAgentError):
    pass


class ConfigError(SigAgentError):
    pass


class PipelineAborted(SigAgentError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report

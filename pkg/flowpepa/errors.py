# flowpepa/errors.py
"""Exception hierarchy. Model problems are Diagnostics, not exceptions."""

from typing import Optional

from flowpepa.types import SourceSpan


class FlowPepaError(Exception):
    """Root of every error raised by flowpepa."""


# ============================================================
# Lookup
# ============================================================


class UnknownProcess(FlowPepaError, LookupError):
    def __init__(self, pid: str) -> None:
        super().__init__(f"Process '{pid}' not found in document")
        self.pid = pid


class UnknownEntity(FlowPepaError, LookupError):
    def __init__(self, eid: str) -> None:
        super().__init__(f"Entity '{eid}' not found in document")
        self.eid = eid


# ============================================================
# Expressions
# ============================================================


class ExprSyntaxError(FlowPepaError):
    def __init__(self, message: str, span: Optional[SourceSpan] = None) -> None:
        super().__init__(message)
        self.span = span


class ResolutionError(FlowPepaError):
    """An alias in a propensity function cannot be bound."""

    def __init__(self, message: str, process_id: Optional[str] = None) -> None:
        super().__init__(message)
        self.process_id = process_id


class UnknownManualArcRef(ResolutionError):
    pass


class UnknownProperty(ResolutionError):
    pass


class UnknownLogicOperator(ResolutionError):
    pass


class CyclicLogic(ResolutionError):
    pass


class EvalError(FlowPepaError):
    def __init__(self, message: str, span: Optional[SourceSpan] = None) -> None:
        super().__init__(message)
        self.span = span


# ============================================================
# Generation / compilation / simulation
# ============================================================


class NoProcesses(FlowPepaError):
    pass


class GenerationError(FlowPepaError):
    def __init__(self, message: str, process_id: Optional[str] = None) -> None:
        super().__init__(message)
        self.process_id = process_id


class CompileError(FlowPepaError):
    pass


class NumericalError(FlowPepaError):
    """Negative or non-finite propensity, negative count, or non-finite derivative."""

    def __init__(self, message: str, reaction: Optional[str] = None, seed: Optional[int] = None) -> None:
        super().__init__(message)
        self.reaction = reaction
        self.seed = seed

    def __reduce__(self):  # type: ignore[no-untyped-def]
        # replicas raise this inside worker processes
        return type(self), (str(self), self.reaction, self.seed)


# ============================================================
# Configuration / front end
# ============================================================


class ConfigError(FlowPepaError):
    pass


class UsageError(FlowPepaError):
    pass

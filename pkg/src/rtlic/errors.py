class RtlicError(Exception):
    """Base class for all toolchain errors."""


class Diagnostic(RtlicError):
    """A located message in ``file:line:col: severity: message`` form."""

    def __init__(self, message, line=0, col=0, path="<input>", severity="error"):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.path = path
        self.severity = severity

    def __str__(self):
        return f"{self.path}:{self.line}:{self.col}: {self.severity}: {self.message}"


class TargetError(RtlicError):
    pass


class SimulationError(RtlicError):
    pass


class InstrumentError(RtlicError):
    pass


class SolverError(RtlicError):
    pass


class StageError(RtlicError):
    """Wraps a failure with the pipeline stage it happened in."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(str(cause))
        self.stage = stage
        self.cause = cause

    def __str__(self):
        return f"[{self.stage}] {self.cause}"

class EngineError(Exception):
    """Base failure raised by the engine services"""
    exit_code = 3


class ParseError(EngineError):
    """Input could not be read: malformed JSON, scalars or schema"""
    exit_code = 1


class PreconditionError(EngineError):
    """An operation was called on data that violates one of its preconditions"""
    exit_code = 2

    def __init__(self, message: str, clause: str = ""):
        super().__init__(message)
        self.clause = clause


class InternalError(EngineError):
    """A certificate the engine produced failed to verify"""
    exit_code = 3

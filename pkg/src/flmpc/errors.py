"""Exception hierarchy and the CLI exit-code table."""


class FLMPCError(Exception):
    """Base class for every error raised by flmpc."""

    exit_code = 70


class ConfigError(FLMPCError):
    exit_code = 2

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormatError(FLMPCError):
    """A dataset, transcript or canonical payload failed to parse."""

    exit_code = 14

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetError(FLMPCError):
    exit_code = 3


class InsufficientClientsError(FLMPCError):
    exit_code = 4


class DomainError(FLMPCError):
    exit_code = 5


class ArityError(FLMPCError):
    exit_code = 6


class FieldOverflowError(FLMPCError, OverflowError):
    """A quantized value does not fit the centered range of Z_q."""

    exit_code = 7


class ThreadingError(FLMPCError):
    exit_code = 8


class SelectionError(FLMPCError):
    exit_code = 9


class IncompleteCallError(FLMPCError):
    exit_code = 10


class TapeViolationError(FLMPCError):
    exit_code = 11


class IncompleteRoundError(FLMPCError):
    exit_code = 12


class UnsupportedCorruptionError(FLMPCError):
    exit_code = 13


# exit code 1 is reserved for a completed check with a FAIL verdict
EXIT_OK = 0
EXIT_CHECK_FAILED = 1

EXIT_CODES = {
    cls.__name__: cls.exit_code
    for cls in (
        ConfigError,
        BudgetError,
        InsufficientClientsError,
        DomainError,
        ArityError,
        FieldOverflowError,
        ThreadingError,
        SelectionError,
        IncompleteCallError,
        TapeViolationError,
        IncompleteRoundError,
        UnsupportedCorruptionError,
        FormatError,
    )
}

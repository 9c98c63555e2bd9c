"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class GklabError(Exception):
    """Base class."""


class InputError(GklabError, ValueError):
    """Bad user input: dimension mismatch, malformed file, violated precondition."""


class ParseError(InputError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, col {col}: {message}" if line else message)


class UnsupportedInputError(InputError):
    """Input is well formed but outside what the pipeline handles (e.g. composite modulus)."""


class ResourceError(GklabError):
    """A configured size cap would be exceeded."""


class InvariantViolation(GklabError, AssertionError):
    """An internal consistency check failed. Always a bug."""

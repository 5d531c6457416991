"""Exception hierarchy shared by every layer of the engine."""

from __future__ import annotations


class HogdbError(Exception):
    """Base class for all engine errors."""


class ReservedLabel(HogdbError, ValueError):
    pass


class InvalidValue(HogdbError, TypeError):
    pass


class TxnClosed(HogdbError):
    pass


class UnknownNode(HogdbError, LookupError):
    pass


class UnknownEdge(HogdbError, LookupError):
    pass


class UnknownSubgraph(HogdbError, LookupError):
    pass


class DuplicateIndex(HogdbError):
    pass


class UnknownIndex(HogdbError, LookupError):
    pass


class Conflict(HogdbError):
    """Raised at commit when a concurrent transaction won the race."""


class ValidationFailed(HogdbError, ValueError):
    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ClosureViolation(ValidationFailed):
    pass


class TooLarge(HogdbError, ValueError):
    pass


class CorruptWal(HogdbError):
    pass


class MalformedLowering(HogdbError):
    pass


class UnboundVariable(HogdbError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class UnknownKindTransition(HogdbError, ValueError):
    pass


class RaggedFeatures(HogdbError, ValueError):
    pass


class MissingKey(HogdbError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class BadParams(HogdbError, ValueError):
    pass


class ParseError(HogdbError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class DanglingReference(ParseError):
    pass

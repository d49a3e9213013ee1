"""Exception types shared across the package."""

from __future__ import annotations


class CalcError(Exception):
    """Base class; `code` is the stable identifier printed by the CLI."""

    code = "E_CALC"


class DegreeMismatch(CalcError):
    code = "E_DEGREE"


class InsufficientOrder(CalcError):
    code = "E_ORDER"

    def __init__(self, message: str, required: int | None = None):
        super().__init__(message)
        self.required = required


class NonzeroBracket(CalcError):
    code = "E_BRACKET"


class NotChainMap(CalcError):
    code = "E_CHAINMAP"


class SkewAdjointViolation(CalcError):
    code = "E_SKEWADJ"

    def __init__(self, message: str, entry: tuple[int, int] | None = None):
        super().__init__(message)
        self.entry = entry


class MixedAlgebroid(CalcError):
    code = "E_ALGEBROID"


class InvalidStructure(CalcError):
    """Structure constants, actions or tables violating a defining identity."""

    code = "E_STRUCTURE"


class UnknownGenerator(CalcError):
    code = "E_GENERATOR"

    def __init__(self, name: str, position: int):
        super().__init__(f"unknown generator {name!r} at column {position}")
        self.name = name
        self.position = position


class ExprSyntaxError(CalcError, SyntaxError):
    code = "E_SYNTAX"

    def __init__(self, message: str, position: int, expected: tuple[str, ...] = ()):
        text = f"{message} at column {position}"
        if expected:
            text += f" (expected {', '.join(expected)})"
        CalcError.__init__(self, text)
        self.msg = text
        self.position = position
        self.expected = expected

    def __str__(self) -> str:
        return self.msg

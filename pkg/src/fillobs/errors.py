"""Exception hierarchy.

Every error carries its class name into CLI messages; ``exit_code`` tells the
CLI how to terminate (1 for bad input, 2 for a violated mathematical
precondition).
"""

from __future__ import annotations


class FillObsError(Exception):
    exit_code = 1

    @property
    def name(self) -> str:
        return type(self).__name__


class InputError(FillObsError):
    """Malformed input: expressions, documents, class specs, matrix shapes."""


class DimensionMismatch(InputError, ValueError):
    pass


class SchemaError(InputError):
    pass


class AxiomViolation(InputError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        more = len(self.violations) - 5
        if more > 0:
            lines += f"; ... ({more} more)"
        super().__init__(f"ring fails its axioms: {lines}")


class ParseError(InputError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (offset {offset})")


class UnknownConstructor(ParseError):
    pass


class ArityError(ParseError):
    pass


class ParamRange(ParseError):
    pass


class UnbalancedParens(ParseError):
    pass


class UnexpectedToken(ParseError):
    pass


class PreconditionError(FillObsError):
    """A theorem or construction was asked to run outside its hypotheses."""

    exit_code = 2


class TorsionKunneth(PreconditionError):
    pass


class NonPrimeField(PreconditionError):
    pass

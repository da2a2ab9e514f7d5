"""Exceptions shared across modules; the CLI maps them to exit codes."""


class HypothesisViolation(ValueError):
    """The input polynomial was seen to be negative where nonnegativity is assumed."""


class PrecisionError(ArithmeticError):
    """A floating-point stage failed to reach its stated accuracy."""

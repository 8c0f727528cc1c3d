"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class BiasDisenError(Exception):
    exit_code = 1


class ValidationError(BiasDisenError, ValueError):
    """Input data or arguments violate a documented contract."""

    exit_code = 2


class SchemaError(ValidationError):
    exit_code = 2


class ParseError(ValidationError):
    """Malformed input file; ``line`` is 1-based when known."""

    exit_code = 2

    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line


class NumericError(BiasDisenError, ArithmeticError):
    """A NaN or infinity showed up in a forward value or gradient."""

    exit_code = 3


class UndefinedMetricError(BiasDisenError, ValueError):
    """A metric has no value on the given input (for example a subgroup with no positives)."""

    exit_code = 4

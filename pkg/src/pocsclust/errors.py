class ContractError(ValueError):
    """An argument violates a documented precondition."""


class ConfigError(ValueError):
    """An algorithm or generator configuration is infeasible for the data."""


class ParseError(ValueError):
    """A point file could not be parsed; `line` is 1-based."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)

"""Exception hierarchy shared by every module."""


class PqeCheckError(Exception):
    pass


class UsageError(PqeCheckError, ValueError):
    """Caller violated a documented precondition."""


class ParseError(UsageError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ResourceLimit(PqeCheckError):
    """A SAT or PQE budget ran out before a decisive answer."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class SolverTimeout(ResourceLimit):
    pass


class PqeTimeout(ResourceLimit):
    pass

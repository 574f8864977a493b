"""Exception and warning types shared across the package."""


class GrammarSyntaxError(ValueError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ImproperGrammarError(ValueError):
    """Raised when an operation needs a proper grammar; carries the report."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"grammar is not proper: {report.describe()}")


class NotConvergedError(RuntimeError):
    def __init__(self, partition):
        self.partition = partition
        super().__init__(
            f"fixed-point iteration did not converge after {partition.iterations} "
            f"iterations (residual {partition.residual:.3e})"
        )


class InconsistentGrammarError(ValueError):
    pass


class InconsistentGrammarWarning(UserWarning):
    pass


class BudgetExhaustedError(RuntimeError):
    """A length budget ran out before certification; ``result`` holds the best so far."""

    def __init__(self, message, result):
        self.result = result
        super().__init__(message)


class UncertifiableMetricError(ValueError):
    pass

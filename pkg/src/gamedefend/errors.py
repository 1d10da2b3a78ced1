"""Exception types shared by the package."""


class GameError(ValueError):
    """Invalid input: malformed frame, profile, objective or utilities."""


class UnsupportedOperation(GameError):
    """The requested analysis is outside what the engine handles."""


class BudgetExceeded(RuntimeError):
    """An exhaustive search would exceed the configured work bound."""

    def __init__(self, needed, budget):
        self.needed = needed
        self.budget = budget
        super().__init__(
            f"oracle needs {needed} work units, budget is {budget} "
            f"(raise it with --budget)")

class SolverError(Exception):
    pass


class InvalidInstance(SolverError, ValueError):
    pass


class BudgetExceeded(SolverError):
    def __init__(self, what, needed, budget):
        super().__init__(f"{what}: needs {needed} evaluations, budget is {budget}")
        self.what = what
        self.needed = needed
        self.budget = budget


class NumericalFailure(SolverError):
    pass


class BoundViolation(SolverError):
    pass

"""Exception types raised by isocrit."""


class IsocritError(Exception):
    """Base class for all package errors."""


class EmptyDomain(IsocritError):
    def __init__(self, domain: int):
        super().__init__(f"domain {domain} has no sampled units")
        self.domain = domain


class EmptyBlock(IsocritError):
    def __init__(self, first: int, last: int):
        super().__init__(f"block {first}..{last} has no sampled units")
        self.block = (first, last)


class MissingPopulationSizes(IsocritError):
    pass


class NonpositiveWeight(IsocritError):
    pass


class DimensionMismatch(IsocritError):
    pass


class SingularCovariance(IsocritError):
    pass


class UnknownDesignClosedForm(IsocritError):
    pass


class BudgetRequired(IsocritError):
    pass


class IndivisibleSizes(IsocritError):
    pass


class InfeasibleAllocation(IsocritError):
    pass


class ConfigError(IsocritError):
    pass

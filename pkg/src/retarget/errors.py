"""Exception types shared across the package."""


class DomainError(ValueError):
    """A numeric argument lies outside the mathematical domain of an operation."""


class ContractError(ValueError):
    """A structural precondition (lengths, indices, ranges) was violated."""

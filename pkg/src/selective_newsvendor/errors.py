"""Exception types shared across the package."""


class SelectiveNewsvendorError(Exception):
    """Base class for all package-specific errors."""


class NegativeDemandError(SelectiveNewsvendorError, ValueError):
    """Selling price too high for an assigned customer: its demand would go negative."""

    def __init__(self, customer: int, demand: float):
        self.customer = customer
        self.demand = demand
        super().__init__(
            f"customer {customer} would sell {demand:.6g} < 0 units; "
            "the price is too high for this selection"
        )


class InfeasibleError(SelectiveNewsvendorError):
    """No solution satisfies the constraints (service level, capacity, eligibility)."""


class SearchRangeError(SelectiveNewsvendorError, ValueError):
    """The price search range is empty (upper bound at or below lower bound)."""


class EnumerationSizeError(SelectiveNewsvendorError):
    """A brute-force enumeration would exceed its hard size guard."""


class InstanceFormatError(SelectiveNewsvendorError, ValueError):
    """An instance file could not be parsed; the message names the offending field."""


class InstanceValidationError(SelectiveNewsvendorError, ValueError):
    """A parsed instance violates model invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid instance: " + "; ".join(self.violations))

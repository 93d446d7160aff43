"""Exception types shared across the package."""


class StochFBError(Exception):
    """Base class for all package errors."""


class PreconditionError(StochFBError, ValueError):
    """An argument violates a documented precondition."""


class DomainError(StochFBError, ValueError):
    """A point lies outside the domain required by the operation."""


class ConstructionError(StochFBError, ValueError):
    """Operator parameters violate a structural requirement."""


class EmptySampleError(StochFBError, RuntimeError):
    """A sampling region does not intersect the operator domain."""


class InfeasibilityError(StochFBError, RuntimeError):
    """A set intersection required by the operation is empty."""


class DivergenceError(StochFBError, RuntimeError):
    """Iterates blew past the divergence guard."""

    def __init__(self, iteration: int, norm: float):
        self.iteration = iteration
        self.norm = norm
        super().__init__(
            f"iterate norm {norm:.3e} exceeded the divergence guard "
            f"at iteration {iteration}"
        )


class FlowIntegrationError(StochFBError, RuntimeError):
    """The inner solver of the flow integrator failed to reach tolerance."""

    def __init__(self, message: str, worst_residual: float | None = None):
        self.worst_residual = worst_residual
        super().__init__(message)


class ConfigError(StochFBError, ValueError):
    """A config document failed schema validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))

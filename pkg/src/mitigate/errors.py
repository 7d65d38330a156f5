"""Exception hierarchy shared by every module."""


class MitigateError(Exception):
    """Base class for all library errors."""


class ConfigError(MitigateError, ValueError):
    """A parameter violates a stated precondition."""


class NumericalError(MitigateError, ArithmeticError):
    """A label, oracle answer, or intermediate value was not finite."""


class EmptySample(MitigateError, ValueError):
    pass


class DimensionError(MitigateError, ValueError):
    pass


class ShapeError(MitigateError, ValueError):
    pass


class BudgetExceeded(MitigateError, RuntimeError):
    """Heavy-coefficient search outgrew its configured bucket or query budget."""


class DegenerateRay(MitigateError, ValueError):
    """A ray through ``x`` from ``x_star`` is undefined because the points coincide."""


class InsufficientAcceptance(MitigateError, RuntimeError):
    """Too few trials survived the acceptance test to form an estimate."""


class SingularSystem(MitigateError, ArithmeticError):
    """Interpolation nodes are (numerically) not pairwise distinct."""


class InadmissibleAttack(MitigateError, ValueError):
    """An attack's corruption budget exceeds the allowed loss mass."""

"""Exception types raised by the simulation pipeline."""


class ConfigError(ValueError):
    """Invalid system or experiment parameters."""


class SingularChannel(ArithmeticError):
    """The ZF Gram matrix is too ill-conditioned to invert."""


class SingularSystem(ArithmeticError):
    """The unregularized LS normal equations are singular."""


class Divergence(ArithmeticError):
    """Gradient descent cost kept increasing; the step is too large."""


class NonConvergence(ArithmeticError):
    """An iterative solver exhausted its iteration budget."""


class NumericalFailure(ArithmeticError):
    """A matrix expected to be positive definite was not."""

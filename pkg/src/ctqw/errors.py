class CtqwError(Exception):
    """Base class for all errors raised by the package."""


class ConfigError(CtqwError, ValueError):
    """Invalid lattice, protocol, propagator or experiment configuration."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(f"{key}: {message}" if key else message)


class NumericalError(CtqwError):
    """A propagation could not be carried out faithfully."""


class BoundaryContamination(NumericalError):
    """Probability reached the edge of the truncated lattice."""


class ConvergenceFailure(NumericalError):
    """The exponential expansion could not meet the requested tolerance."""

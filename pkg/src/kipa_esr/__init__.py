"""Design and analysis toolkit for a kinetic-inductance parametric amplifier used as an ESR resonator."""

__version__ = "0.1.0"


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or hit a singular point."""


class DomainError(ValueError):
    """An input lies outside the validity range of a model."""

"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical-stability violations with 3.
"""


class ConfigurationError(ValueError):
    """Invalid grid sizes, kernel parameters, or run configuration."""


class StabilityError(RuntimeError):
    """A time step violates an explicit-scheme stability bound."""


class DegenerateWeightError(ValueError):
    """A kernel entry is too small to serve as an inverse weight."""


class ModelAssemblyError(ValueError):
    """An assembled macroscopic diffusion tensor is indefinite."""

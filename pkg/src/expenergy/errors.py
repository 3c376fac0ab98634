"""Exception types shared across the package."""


class ExpEnergyError(Exception):
    """Base class for all package errors."""


class InadmissibleParameterError(ExpEnergyError, ValueError):
    """A parameter lies outside the domain where a formula is valid."""


class EmptyProjectionError(ExpEnergyError, ValueError):
    """A truncation removed all of the state's weight."""


class ResourceLimitError(ExpEnergyError, RuntimeError):
    """A configured resource cap (terms, dimension) would be exceeded."""


class IncompatibleBackendError(ExpEnergyError, ValueError):
    """The circuit contains gates the chosen backend cannot handle."""


class CircuitParseError(ExpEnergyError, ValueError):
    """A circuit file could not be parsed into a valid circuit."""

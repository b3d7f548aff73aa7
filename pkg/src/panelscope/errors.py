"""Exception types shared across the toolkit."""


class PanelscopeError(Exception):
    """Base class for all toolkit errors."""


class ParseError(PanelscopeError):
    """A manifest or data file could not be parsed."""


class ValidationError(PanelscopeError):
    """Data violates a structural invariant."""


class NotFoundError(PanelscopeError):
    """A referenced entity does not exist."""


class EmptyInputError(PanelscopeError):
    """An operation requiring non-empty input got an empty one."""


class DegenerateDistributionError(PanelscopeError):
    """Kappa is undefined: both raters are constant on the same label."""

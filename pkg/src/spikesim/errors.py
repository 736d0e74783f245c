"""Exception types shared across the simulator."""


class SpikesimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SpikesimError):
    """Inconsistent configuration, e.g. mixing operand widths."""


class DimensionError(SpikesimError):
    """Mismatched feature-map / kernel / state dimensions."""


class QueueCapacityError(SpikesimError):
    """An address-event queue column exceeded its configured capacity."""


class QueueStateError(SpikesimError):
    """Illegal queue operation (write after finalize, double finalize, ...)."""


class ModelFormatError(SpikesimError):
    """Malformed model or input file; message names the offending location."""


class ModelValidationError(SpikesimError):
    """Structurally parseable model that violates a network invariant."""

class ShapeError(ValueError):
    """Dimension or length mismatch between tensors / representations."""


class ValidationError(ValueError):
    """A value violates a domain rule (label grid, padding, finiteness, ...)."""


class FormatError(ValueError):
    """A container (archive, checkpoint) is malformed or incomplete."""


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""

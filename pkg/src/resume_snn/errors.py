"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration (unknown key, value out of range)."""


class GenerationError(RuntimeError):
    """Constrained stochastic generation exceeded its sampling budget."""

class UnsupportedParameters(ValueError):
    """Parameters outside what the implementation can evaluate."""


class ModelError(ValueError):
    """A noise model that cannot be used as requested (e.g. singular)."""

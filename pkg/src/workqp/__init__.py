"""Work quasiprobabilities for driven quantum systems."""

__version__ = "0.1.0"

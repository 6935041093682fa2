"""Feature selection via unique relevant information."""

__version__ = "0.1.0"

"""Mine fix patterns from past code changes and apply them to new bugs."""

__version__ = "0.1.0"

"""Online linear optimization with imperfect hints."""

__version__ = "0.1.0"

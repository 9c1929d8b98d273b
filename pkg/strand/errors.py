"""Root of the exception hierarchy shared by every strand module."""


class StrandError(Exception):
    """Base class for all domain errors raised by strand."""

"""Shared exception types."""


class NoPathError(Exception):
    """No admissible path exists through the trellis."""


class SizeLimitError(Exception):
    """An enumeration or dense-matrix guard was exceeded."""


class DecodeFailure(Exception):
    """Every error class in an adaptive schedule was exhausted."""

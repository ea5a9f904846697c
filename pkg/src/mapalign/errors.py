"""Exception types shared across the package.

Each maps to a distinct CLI exit code so callers can tell apart the
failure modes of the pipeline.
"""


class MapAlignError(Exception):
    """Base class for all pipeline errors."""

    exit_code = 1


class InputError(MapAlignError):
    """Unreadable, malformed, or unsupported input (maps or config)."""

    exit_code = 2


class NoTraitsError(MapAlignError):
    """Trait detection found nothing to build an arrangement from."""

    exit_code = 3


class NoFacesError(MapAlignError):
    """The arrangement has no bounded face."""

    exit_code = 4


class EmptyPoolError(MapAlignError):
    """No hypothesis survived generation and rejection."""

    exit_code = 5

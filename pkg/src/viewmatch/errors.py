"""Exception hierarchy.

Everything raised on bad data, bad shapes, or bad configuration derives from
ViewmatchError so the CLI can map domain failures to a single exit code.
"""


class ViewmatchError(Exception):
    """Base class for all viewmatch domain errors."""


class ShapeError(ViewmatchError):
    """Array dimensions do not match an operation's contract."""


class NumericError(ViewmatchError):
    """A computation produced NaN or Inf."""


class ConfigError(ViewmatchError):
    """Invalid configuration value or degenerate input set."""


class FormatError(ViewmatchError):
    """Malformed file (checkpoint, config, dataset)."""


class MetricError(ViewmatchError):
    """A metric is undefined for the given inputs."""


class InputError(ViewmatchError):
    """Empty or otherwise unusable runtime input."""

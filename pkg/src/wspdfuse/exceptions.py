"""Exception types shared across the package."""


class WspdFuseError(Exception):
    """Base class for all package errors."""


class ConfigError(WspdFuseError, ValueError):
    """A parameter lies outside its valid domain (``s <= 0``, ``p < 1`` ...)."""


class DimensionMismatchError(WspdFuseError, ValueError):
    """Two operands live in spaces of different dimension."""


class PointSetError(WspdFuseError, ValueError):
    """A raw point collection is not a valid point set.

    ``condition`` names the first violated requirement:

    * ``"a"``: points must live in R^n with n > 1 (and be finite)
    * ``"b"``: the set must be non-empty
    * ``"c"``: the points must be pairwise distinct
    """

    def __init__(self, condition, message):
        super().__init__(f"condition ({condition}) violated: {message}")
        self.condition = condition


class DisconnectedGraphError(WspdFuseError, RuntimeError):
    """The candidate graph does not connect the points a computation needs."""


class StageError(WspdFuseError, RuntimeError):
    """An error raised inside one stage of the fusion pipeline."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause

"""Exception hierarchy shared by the parser, the semantics and the engines."""


class PpgError(Exception):
    """Base class for every error raised by fkppg."""


# -- model text ------------------------------------------------------------

class ModelError(PpgError):
    """A problem with model source text; carries a 1-based position."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class ModelSyntaxError(ModelError):
    def __init__(self, message, line=None, col=None, expected=()):
        self.expected = tuple(expected)
        if self.expected:
            message = f"{message} (expected {', '.join(self.expected)})"
        super().__init__(message, line, col)


class UndeclaredVariable(ModelError):
    pass


class UndeclaredCheckpoint(ModelError):
    pass


class DuplicateCheckpoint(ModelError):
    pass


class MissingNil(ModelError):
    pass


class UnknownDistribution(ModelError):
    pass


# -- structural validation -------------------------------------------------

class ValidationError(PpgError):
    pass


class PartitionViolation(ValidationError):
    """Not exactly one outgoing guard is enabled at some store."""

    def __init__(self, checkpoint, store, enabled):
        self.checkpoint = checkpoint
        self.store = tuple(float(v) for v in store)
        self.enabled = int(enabled)
        super().__init__(
            f"checkpoint {checkpoint}: {self.enabled} enabled guards "
            f"(need exactly 1) at store {list(self.store)}"
        )


class NilSelfLoopConflict(ValidationError):
    pass


class ScoreOnNil(ValidationError):
    pass


# -- evaluation --------------------------------------------------------------

class NumericDomain(PpgError):
    """An expression produced NaN (inf - inf, 0/0, 0 * inf, ...)."""


class PredicateNotBoolean(PpgError):
    pass


class ScoreOutOfRange(PpgError):
    pass


class InvalidParameter(PpgError):
    pass


class QueryOutOfRange(PpgError):
    pass


# -- oracle ------------------------------------------------------------------

class ContinuousDistribution(PpgError):
    pass


class PathExplosion(PpgError):
    def __init__(self, depth, live, cap):
        self.depth = depth
        self.live = live
        self.cap = cap
        super().__init__(f"{live} live prefixes at depth {depth} exceed cap {cap}")


class ZeroTotalWeight(PpgError):
    pass


class NotTerminatedYet(PpgError):
    pass


# -- particle engines ----------------------------------------------------------

class ZeroWeightEnsemble(PpgError):
    """All particle weights are zero; `step` is the step whose weights collapsed."""

    def __init__(self, step=None, message=None):
        self.step = step
        if message is None:
            message = "all particle weights are zero"
            if step is not None:
                message += f" at step {step}"
        super().__init__(message)

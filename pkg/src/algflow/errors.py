"""Exception types shared across modules.

Each error carries a fixed CLI exit code so the shell can map failures
without inspecting messages.
"""


class AlgflowError(Exception):
    exit_code = 1


class SchemaError(AlgflowError):
    exit_code = 2


class DimensionMismatch(AlgflowError, ValueError):
    exit_code = 2


class TruncationInsufficient(AlgflowError):
    exit_code = 3


class CertificationFailure(AlgflowError):
    exit_code = 4


class Infeasible(AlgflowError):
    exit_code = 5


class DepthExceeded(AlgflowError):
    exit_code = 5

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial or []


class RankNotReached(AlgflowError):
    exit_code = 5


class AlphaDegenerate(AlgflowError, ValueError):
    exit_code = 2


class NoPoles(AlgflowError):
    """Raised by stratify when the curve has no pole; ``value`` is f(0)."""
    exit_code = 0

    def __init__(self, value):
        super().__init__("curve has no negative-exponent term")
        self.value = value


class Undecided(Exception):
    """A ball comparison could not be settled at the current precision.

    Internal signal; callers escalate precision once and convert a second
    failure into CertificationFailure.
    """

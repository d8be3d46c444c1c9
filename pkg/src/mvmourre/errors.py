"""Exception hierarchy shared by the numerical modules."""


class MourreError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(MourreError, ValueError):
    """Invalid model parameters (odd kappa, unsupported dimension, ...)."""


class BranchRangeError(MourreError, ValueError):
    """Requested level lies outside the range of T_kappa on a well."""


class DomainError(MourreError, ValueError):
    """Point lies outside the constant-energy surface."""


class ConstructionFailure(MourreError):
    """A chain step left its well or broke the ordering.

    ``step`` is the index of the coordinate being built and ``direction``
    is +1 when the trial energy was too large, -1 when too small, 0 when
    unknown.
    """

    def __init__(self, step, reason, direction=0):
        super().__init__(f"step {step}: {reason}")
        self.step = step
        self.reason = reason
        self.direction = direction


class NoConvergence(MourreError):
    pass


class ScheduleInfeasible(MourreError):
    pass


class DegenerateFactor(MourreError, ZeroDivisionError):
    pass


class SingularSystem(MourreError):
    pass


class UnsupportedPair(MourreError, ValueError):
    pass


class ZeroFactor(MourreError, ValueError):
    pass


class DimensionMismatch(MourreError, ValueError):
    pass


class RankDeficient(MourreError):
    def __init__(self, rank, expected):
        super().__init__(f"rank {rank} < {expected} (null space dimension {expected - rank})")
        self.rank = rank
        self.nullity = expected - rank


class NoValidSigma(MourreError):
    def __init__(self, reasons):
        lines = "; ".join(f"{list(s)}: {r}" for s, r in reasons)
        super().__init__(f"no candidate index set passed: {lines}")
        self.reasons = reasons

from __future__ import annotations


class IetError(Exception):
    """Base class for every error raised by the package."""


class NonPositiveLength(IetError):
    pass


class NotBijective(IetError):
    pass


class Reducible(IetError):
    pass


class OutOfDomain(IetError):
    pass


class TieNotDefined(IetError):
    """Rauzy induction is undefined: the two last intervals have equal length."""

    def __init__(self, depth: int, message: str | None = None):
        self.depth = depth
        super().__init__(message or f"tie between the last intervals at depth {depth}")


class NotPositive(IetError):
    pass


class SamplingExhausted(IetError):
    pass


class DiscontinuityInXi(IetError):
    pass


class ClaimViolation(IetError):
    pass

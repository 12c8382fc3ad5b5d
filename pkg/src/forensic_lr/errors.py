"""Exception types shared across the package."""


class ForensicLRError(Exception):
    """Base class for all errors raised by forensic_lr."""


class ValidationError(ForensicLRError, ValueError):
    """Malformed input: bad profile, ragged database, wrong lengths, bad config."""


class DomainError(ForensicLRError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class IndeterminateLimitError(ForensicLRError, ArithmeticError):
    """A Haldane-limit quantity that is 0/0 and has no finite value."""


class OracleError(ForensicLRError, RuntimeError):
    """A verification routine could not produce a trustworthy number."""
